#pragma once

#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "helflow/constraints.hpp"
#include "helflow/harmonics.hpp"
#include "helflow/hessian.hpp"
#include "helflow/oracles.hpp"

// Self-check battery for a configured surface: analytic values, conservation
// identities, and finite-difference oracles for every variational formula.
// Each check reports a scalar error against a pinned bound; the battery is
// deterministic (fixed seeds) so repeated runs agree bit for bit.

namespace helflow {

struct CheckResult {
  std::string name;
  double err = 0.0;
  double bound = 0.0;
  bool pass = false;
};

namespace detail {

inline CheckResult check(std::string name, double err, double bound) {
  CheckResult r;
  r.name = std::move(name);
  r.err = err;
  r.bound = bound;
  r.pass = err <= bound;
  return r;
}

}  // namespace detail

// Independent 1-D quadrature of the torus bending integrand: everything is a
// function of the minor angle alone, and the periodic trapezoid rule is
// spectrally exact on it.
inline double torus_energy_quadrature(double a, double r, double kappa,
                                      double c0, int n = 4096) {
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double v = 2.0 * kPi * k / n;
    const double A = a + r * std::cos(v);
    const double H = -std::cos(v) / A - 1.0 / r;
    acc += (H - c0) * (H - c0) * A * r;
  }
  return 0.5 * kappa * acc * (2.0 * kPi / n) * (2.0 * kPi);
}

// One convected-difference error per material-derivative family, with the
// best epsilon's error and the best observed consecutive-pair rate.
struct MaterialCheck {
  std::string name;
  double best_err = 1e300;
  double order = 0.0;
  // false when the error is flat across the sweep (resolution or roundoff
  // floor), where no convergence rate can be observed
  bool rate_measurable = false;
};

inline std::vector<MaterialCheck> material_identity_errors(
    const GeometryState& s, const Field& w, const std::vector<double>& epses) {
  MaterialDerivatives d = material_derivatives(s, w);
  auto G = [](Field GeometryState::*m) {
    return [m](const GeometryState& st) { return st.*m; };
  };
  using Getter = std::function<Field(const GeometryState&)>;
  struct Family {
    std::string name;
    std::vector<std::pair<const Field*, Getter>> comps;
  };
  std::vector<Family> fams;
  fams.push_back({"metric rate", {{&d.g_uu, G(&GeometryState::g_uu)},
                                  {&d.g_uv, G(&GeometryState::g_uv)},
                                  {&d.g_vv, G(&GeometryState::g_vv)}}});
  fams.push_back({"inverse metric rate", {{&d.gi_uu, G(&GeometryState::gi_uu)},
                                          {&d.gi_uv, G(&GeometryState::gi_uv)},
                                          {&d.gi_vv, G(&GeometryState::gi_vv)}}});
  fams.push_back({"curvature rate", {{&d.k_uu, G(&GeometryState::k_uu)},
                                     {&d.k_uv, G(&GeometryState::k_uv)},
                                     {&d.k_vv, G(&GeometryState::k_vv)}}});
  fams.push_back({"raised curvature rate",
                  {{&d.kup_uu, G(&GeometryState::kup_uu)},
                   {&d.kup_uv, G(&GeometryState::kup_uv)},
                   {&d.kup_vv, G(&GeometryState::kup_vv)}}});
  fams.push_back({"area element rate", {{&d.sqrtg, G(&GeometryState::sqrtg)}}});
  fams.push_back({"mean curvature rate", {{&d.H, G(&GeometryState::H)}}});
  fams.push_back({"Gauss curvature rate", {{&d.K, G(&GeometryState::K)}}});
  Getter lapH_get = [](const GeometryState& st) {
    return laplace_beltrami(st, st.H);
  };
  fams.push_back({"curvature Laplacian rate", {{&d.lapH, lapH_get}}});

  // Joint Frobenius-relative error per family: components of one tensor are
  // measured against the whole tensor's rate, so identically-zero components
  // (e.g. off-diagonal rates at h = 0) do not divide an O(eps^2) tail by a
  // floor.
  const double area = s.area();
  std::vector<std::vector<double>> errs(fams.size());
  for (double e : epses) {
    GeometryState sp = convected_geometry(s, w, e);
    GeometryState sm = convected_geometry(s, w, -e);
    for (size_t fi = 0; fi < fams.size(); ++fi) {
      double num2 = 0.0, den2 = 0.0;
      for (const auto& [exact, get] : fams[fi].comps) {
        Field fd = (get(sp) - get(sm)) / (2.0 * e);
        num2 += integrate(s, (fd - *exact) * (fd - *exact));
        den2 += integrate(s, *exact * *exact);
      }
      const double den = std::max(std::sqrt(den2 / area), 1e-8);
      errs[fi].push_back(std::sqrt(num2 / area) / den);
    }
  }
  std::vector<MaterialCheck> out;
  for (size_t fi = 0; fi < fams.size(); ++fi) {
    MaterialCheck mc;
    mc.name = fams[fi].name;
    for (size_t k = 0; k < epses.size(); ++k) {
      mc.best_err = std::min(mc.best_err, errs[fi][k]);
      if (k + 1 < epses.size() && errs[fi][k] > 0.0 && errs[fi][k + 1] > 0.0)
        mc.order = std::max(mc.order, std::log(errs[fi][k] / errs[fi][k + 1]) /
                                          std::log(epses[k] / epses[k + 1]));
    }
    mc.rate_measurable =
        mc.best_err > 0.0 && errs[fi].front() >= 2.0 * mc.best_err;
    out.push_back(std::move(mc));
  }
  return out;
}

inline std::vector<CheckResult> run_verification(const GridPtr& g,
                                                 const Physics& p) {
  std::vector<CheckResult> out;
  const bool sphere = g->kind() == SurfaceKind::Sphere;
  const double reach = g->reach();
  GeometryState s0 = pullback_geometry(g, Field::Zero(g->nu, g->nv));

  {
    const double A = sphere ? sphere_area(g->ref.radius)
                            : torus_area(g->ref.major, g->ref.minor);
    const double V = sphere ? sphere_volume(g->ref.radius)
                            : torus_volume(g->ref.major, g->ref.minor);
    const double err = std::max(std::abs(s0.area() - A) / A,
                                std::abs(s0.volume() - V) / V);
    out.push_back(detail::check("area/volume vs closed form", err, 1e-10));
  }
  {
    const double Fref =
        sphere ? sphere_energy(g->ref.radius, p.kappa, p.c0)
               : torus_energy_quadrature(g->ref.major, g->ref.minor, p.kappa,
                                         p.c0);
    const double err =
        std::abs(energy(s0, p) - Fref) / std::max(1.0, std::abs(Fref));
    out.push_back(
        detail::check("bending energy vs independent quadrature", err, 1e-8));
  }
  {
    // total curvature is topological, whatever the height field
    const double target = sphere ? 4.0 * kPi : 0.0;
    double err = 0.0;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      GeometryState s =
          pullback_geometry(g, random_smooth_field(*g, seed, 0.2 * reach));
      err = std::max(err, std::abs(integrate(s, s.K) - target) /
                              std::max(1.0, std::abs(target)));
    }
    out.push_back(detail::check("total curvature at random heights", err, 1e-7));
  }

  // finite-difference oracles at a deformed state
  GeometryState s = pullback_geometry(g, random_smooth_field(*g, 21, 0.1 * reach));
  Field w = random_smooth_field(*g, 22, 1.0);
  const std::vector<double> epses = {2e-2, 1e-2, 5e-3, 2.5e-3, 1.25e-3};

  {
    auto fd_a = [&](double e) {
      return (convected_geometry(s, w, e).area() -
              convected_geometry(s, w, -e).area()) /
             (2.0 * e);
    };
    auto fd_v = [&](double e) {
      return (convected_geometry(s, w, e).volume() -
              convected_geometry(s, w, -e).volume()) /
             (2.0 * e);
    };
    FdSweep sa = fd_sweep(fd_a, area_differential(s, w), s.area(), epses);
    FdSweep sv = fd_sweep(fd_v, volume_differential(s, w), s.volume(), epses);
    out.push_back(detail::check("area/volume differentials vs central differences",
                                std::max(sa.best_err, sv.best_err), 1e-6));
  }
  {
    const double exact = integrate(s, l2_gradient(s, p) * w);
    auto fd = [&](double e) {
      return (energy(convected_geometry(s, w, e), p) -
              energy(convected_geometry(s, w, -e), p)) /
             (2.0 * e);
    };
    FdSweep sw = fd_sweep(fd, exact, std::max(std::abs(exact), 1.0), epses);
    out.push_back(
        detail::check("energy gradient vs central differences", sw.best_err, 1e-4));
  }
  {
    Field exact = linearized_gradient(s, p, w);
    auto fd = [&](double e) {
      return Field((l2_gradient(convected_geometry(s, w, e), p) -
                    l2_gradient(convected_geometry(s, w, -e), p)) /
                   (2.0 * e));
    };
    FdSweep sw = fd_sweep_field_rms(fd, s, exact, field_scale(exact),
                                    {2e-2, 1e-2, 5e-3, 2.5e-3});
    out.push_back(detail::check("linearized gradient vs central differences",
                                sw.best_err, 1e-4));
  }
  {
    const double exact = second_variation(s, p, w, w);
    const double F0 = energy(s, p);
    auto fd = [&](double e) {
      return (energy(convected_geometry(s, w, e), p) - 2.0 * F0 +
              energy(convected_geometry(s, w, -e), p)) /
             (e * e);
    };
    FdSweep sw = fd_sweep(fd, exact, std::max(std::abs(exact), 1.0), epses);
    out.push_back(detail::check("second variation vs second differences",
                                sw.best_err, 1e-3));
  }
  {
    // the eight material-derivative identities, one error per family
    double worst = 0.0;
    std::string worst_name;
    for (const MaterialCheck& mc :
         material_identity_errors(s, w, {2e-3, 1e-3, 5e-4, 2.5e-4})) {
      if (mc.best_err > worst) {
        worst = mc.best_err;
        worst_name = mc.name;
      }
    }
    out.push_back(detail::check(
        "material identities vs convected differences (worst: " + worst_name +
            ")",
        worst, 1e-5));
  }
  {
    ComponentTargets tgt = targets_of(s0);
    Field hr = restore_constraints(g, random_smooth_field(*g, 31, 0.1 * reach), tgt);
    GeometryState sr = pullback_geometry(g, hr);
    double err = std::abs(sr.area() - tgt.area) / tgt.area;
    if (!tgt.round)
      err = std::max(err, std::abs(sr.volume() - tgt.volume) / tgt.volume);
    out.push_back(detail::check("constraint restoration hits targets", err, 1e-10));
  }
  {
    Field pw = project_tangent(s, w);
    const double scale = std::max(1.0, l2_norm(s, w));
    const double err = std::max(std::abs(area_differential(s, pw)),
                                std::abs(volume_differential(s, pw))) /
                       scale;
    out.push_back(detail::check("tangent projection kills both differentials",
                                err, 1e-9));
  }
  return out;
}

// Pretty pass/fail table; returns true iff every check passed.
inline bool print_verification(std::ostream& os,
                               const std::vector<CheckResult>& results) {
  bool all = true;
  for (const CheckResult& r : results) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s  %-58s err %9.3e  bound %8.1e\n",
                  r.pass ? "PASS" : "FAIL", r.name.c_str(), r.err, r.bound);
    os << buf;
    all = all && r.pass;
  }
  return all;
}

}  // namespace helflow
