#pragma once

#include <optional>

#include "helflow/energy.hpp"

namespace helflow {

// L2-orthogonal projection onto the tangent space of the area/volume
// constraint set: removes the span of the constraint normals {1, H}.  The
// 2x2 Gram solve is rank-revealing, so on a round sphere (H constant) the
// span degenerates to the constants and only that direction is removed.
inline Field project_tangent(const GeometryState& s, const Field& w) {
  const double g11 = s.area();
  const double g12 = integrate(s, s.H);
  const double g22 = integrate(s, s.H * s.H);
  const double r1 = integrate(s, w);
  const double r2 = integrate(s, w * s.H);
  double c1, c2;
  spd2_solve(g11, g12, g22, r1, r2, c1, c2);
  return w - c1 - c2 * s.H;
}

// Area/volume targets of one component.  Round components (isoperimetric
// equality A^3 = 36 pi V^2 within 1e-8 relative) constrain area only: the
// volume bound is then attained exactly at the target shape, so a volume
// constraint would be degenerate.
struct ComponentTargets {
  double area = 0.0;
  double volume = 0.0;
  bool round = false;
};

inline ComponentTargets make_targets(double area, double volume) {
  const double a3 = area * area * area;
  const double iso = 36.0 * kPi * volume * volume;
  if (a3 < iso * (1.0 - 1e-8))
    throw DomainError("infeasible constraint targets: A^3 = " +
                      std::to_string(a3) + " < 36 pi V^2 = " +
                      std::to_string(iso));
  ComponentTargets t;
  t.area = area;
  t.volume = volume;
  t.round = std::abs(a3 - iso) <= 1e-8 * a3;
  return t;
}

inline ComponentTargets targets_of(const GeometryState& s) {
  return make_targets(s.area(), s.volume());
}

// Target-aware tangent projection.  Round components constrain area only, so
// just the area normal H is removed and the volume direction stays free; on
// an exactly round state (H constant) this coincides with the rank-revealing
// two-constraint projection.
inline Field project_tangent(const GeometryState& s, const Field& w,
                             const ComponentTargets& tgt) {
  if (!tgt.round) return project_tangent(s, w);
  const double hh = integrate(s, s.H * s.H);
  const double c = integrate(s, w * s.H) / hh;
  return w - c * s.H;
}

// Restore A and V (A only for round components) by a damped Newton
// correction h -> h + c1 * 1 + c2 * H along the constraint normal fields of
// the entry geometry.  Converges to 1e-12 relative residuals.
inline Field restore_constraints(const GridPtr& grid, const Field& h,
                                 const ComponentTargets& tgt) {
  GeometryState s0 = pullback_geometry(grid, h);
  const Field chi2 = s0.H;
  const int m = tgt.round ? 1 : 2;

  auto eval = [&](double c1, double c2)
      -> std::optional<std::pair<Eigen::Vector2d, GeometryState>> {
    Field hc = h + c1;
    if (m == 2) hc += c2 * chi2;
    try {
      GeometryState s = pullback_geometry(grid, hc);
      Eigen::Vector2d r(s.area() - tgt.area,
                        m == 2 ? s.volume() - tgt.volume : 0.0);
      return std::make_pair(r, std::move(s));
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  auto scaled = [&](const Eigen::Vector2d& r) {
    double e = std::abs(r(0)) / std::max(1.0, std::abs(tgt.area));
    if (m == 2)
      e = std::max(e, std::abs(r(1)) / std::max(1.0, std::abs(tgt.volume)));
    return e;
  };

  double c1 = 0.0, c2 = 0.0;
  auto cur = eval(c1, c2);
  if (!cur) throw DomainError("constraint restoration: entry height inadmissible");
  for (int it = 0; it < 60; ++it) {
    if (scaled(cur->first) <= 1e-12) {
      Field hc = h + c1;
      if (m == 2) hc += c2 * chi2;
      return hc;
    }
    const GeometryState& s = cur->second;
    // dA, dV under the height direction chi: normal speed chi * tilt.
    Eigen::Matrix2d J = Eigen::Matrix2d::Identity();
    J(0, 0) = area_differential(s, s.tilt);
    J(1, 0) = volume_differential(s, s.tilt);
    if (m == 2) {
      Field w2 = chi2 * s.tilt;
      J(0, 1) = area_differential(s, w2);
      J(1, 1) = volume_differential(s, w2);
    } else {
      J(0, 1) = 0.0;
      J(1, 1) = 1.0;
      // keep the 2x2 solve well posed; the second equation is trivial
    }
    Eigen::Vector2d step = J.partialPivLu().solve(-cur->first);
    if (!step.allFinite())
      throw DomainError("constraint restoration: singular Newton system");
    double alpha = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt, alpha *= 0.5) {
      auto trial = eval(c1 + alpha * step(0), c2 + alpha * step(1));
      if (trial && scaled(trial->first) < scaled(cur->first)) {
        c1 += alpha * step(0);
        c2 += alpha * step(1);
        cur = std::move(trial);
        moved = true;
        break;
      }
    }
    if (!moved)
      throw DomainError("constraint restoration stalled, residual = " +
                        std::to_string(scaled(cur->first)));
  }
  throw DomainError("constraint restoration did not converge, residual = " +
                    std::to_string(scaled(cur->first)));
}

}  // namespace helflow
