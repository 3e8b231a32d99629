#pragma once

#include <functional>
#include <vector>

#include "helflow/geometry.hpp"

namespace helflow {

// Central-difference sweep against a formula value.  fd(eps) evaluates the
// centered difference quotient; errors are measured relative to scale.
// observed_order is the best consecutive-pair convergence rate seen before
// the error floor; central differences of smooth quantities give ~2.
struct FdSweep {
  std::vector<double> eps, err;
  double best_err = 0.0;
  double observed_order = 0.0;
};

inline FdSweep fd_sweep(const std::function<double(double)>& fd, double exact,
                        double scale, std::vector<double> epses = {}) {
  if (epses.empty()) epses = {4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
  FdSweep s;
  s.eps = epses;
  for (double e : epses) s.err.push_back(std::abs(fd(e) - exact) / scale);
  s.best_err = *std::min_element(s.err.begin(), s.err.end());
  s.observed_order = 0.0;
  for (size_t i = 0; i + 1 < s.err.size(); ++i) {
    if (s.err[i] < 1e-12 || s.err[i + 1] < 1e-13) continue;  // hit the floor
    const double p =
        std::log(s.err[i] / s.err[i + 1]) / std::log(s.eps[i] / s.eps[i + 1]);
    s.observed_order = std::max(s.observed_order, p);
  }
  return s;
}

// Field-valued version: fd(eps) returns the central-difference field, the
// error is the sup-norm deviation from the formula field relative to scale.
inline FdSweep fd_sweep_field(const std::function<Field(double)>& fd,
                              const Field& exact, double scale,
                              std::vector<double> epses = {}) {
  if (epses.empty()) epses = {4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
  FdSweep s;
  s.eps = epses;
  for (double e : epses)
    s.err.push_back((fd(e) - exact).abs().maxCoeff() / scale);
  s.best_err = *std::min_element(s.err.begin(), s.err.end());
  for (size_t i = 0; i + 1 < s.err.size(); ++i) {
    if (s.err[i] < 1e-12 || s.err[i + 1] < 1e-13) continue;
    const double p =
        std::log(s.err[i] / s.err[i + 1]) / std::log(s.eps[i] / s.eps[i + 1]);
    s.observed_order = std::max(s.observed_order, p);
  }
  return s;
}

// Area-weighted RMS deviation relative to scale.  For fields on the sphere
// chart this is the right comparison norm: pointwise spectral roundoff of
// high-order operators is amplified near the poles, where the quadrature
// weight correctly counts it with vanishing measure.
inline double rel_rms(const GeometryState& s, const Field& diff, double scale) {
  return std::sqrt(integrate(s, diff * diff) / s.area()) / scale;
}

inline FdSweep fd_sweep_field_rms(const std::function<Field(double)>& fd,
                                  const GeometryState& s, const Field& exact,
                                  double scale, std::vector<double> epses = {}) {
  if (epses.empty()) epses = {4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3};
  FdSweep sw;
  sw.eps = epses;
  for (double e : epses) sw.err.push_back(rel_rms(s, fd(e) - exact, scale));
  sw.best_err = *std::min_element(sw.err.begin(), sw.err.end());
  for (size_t i = 0; i + 1 < sw.err.size(); ++i) {
    if (sw.err[i] < 1e-12 || sw.err[i + 1] < 1e-13) continue;
    const double p = std::log(sw.err[i] / sw.err[i + 1]) /
                     std::log(sw.eps[i] / sw.eps[i + 1]);
    sw.observed_order = std::max(sw.observed_order, p);
  }
  return sw;
}

// Surface convected with pure normal speed w: nodes move to P + eps*w*nrm.
// Differentiating results at fixed eps-parametrized nodes gives material
// derivatives along the normal flow, the setting in which the evolution
// identities hold.  (A height-field path h + eps*wt moves nodes with an
// extra tangential drag at h != 0 and measures something else.)
inline GeometryState convected_geometry(const GeometryState& base, const Field& w,
                                        double eps) {
  Vec3Field P;
  for (int c = 0; c < 3; ++c) P[c] = base.P[c] + (eps * w) * base.nrm[c];
  return geometry_from_positions(base.grid, P, base.nrm);
}

inline double field_scale(const Field& f, double floor_scale = 1e-8) {
  return std::max(f.abs().maxCoeff(), floor_scale);
}

}  // namespace helflow
