#pragma once

#include <Eigen/Eigenvalues>

#include "helflow/geometry.hpp"

namespace helflow {

struct Physics {
  double kappa = 1.0;  // bending modulus
  double c0 = 0.0;     // spontaneous curvature
};

// Bending energy (kappa/2) int (H - c0)^2 dA.
inline double energy(const GeometryState& s, const Physics& p) {
  Field d = s.H - p.c0;
  return 0.5 * p.kappa * integrate(s, d * d);
}

// L2 gradient of the energy with respect to normal velocity:
//   kappa [ Delta H + H (H^2/2 - 2K) + c0 (2K - H c0 / 2) ].
// Against a normal speed w, dF = int grad * w dA.
inline Field l2_gradient(const GeometryState& s, const Physics& p) {
  Field lapH = laplace_beltrami(s, s.H, Parity::Even);
  Field g = lapH + s.H * (0.5 * s.H * s.H - 2.0 * s.K) +
            p.c0 * (2.0 * s.K - 0.5 * p.c0 * s.H);
  return p.kappa * g;
}

// Chart-differential density: dF(wt) = int density * wt du dv for a height
// perturbation h -> h + eps*wt.  The induced normal speed is wt times the
// normal tilt <nu_ref, nu_h>, and the realized area element is sqrt(g) du dv.
inline Field chart_gradient_density(const GeometryState& s, const Physics& p) {
  return l2_gradient(s, p) * s.tilt * s.sqrtg;
}

inline double energy_differential(const GeometryState& s, const Physics& p,
                                  const Field& wt) {
  return s.grid->integrate_chart(chart_gradient_density(s, p) * wt);
}

struct AreaVolume {
  double area = 0.0, volume = 0.0;
};

inline AreaVolume area_volume(const GeometryState& s) {
  return {s.area(), s.volume()};
}

// First variations of area and enclosed volume under normal speed w:
// d/dt dA = -w H dA, so dA(w) = -int w H dA and dV(w) = int w dA.
inline double area_differential(const GeometryState& s, const Field& w) {
  return -integrate(s, w * s.H);
}
inline double volume_differential(const GeometryState& s, const Field& w) {
  return integrate(s, w);
}

// Min-norm least-squares solve of the symmetric positive semidefinite 2x2
// system G c = r with spectral cutoff rel_cut * lambda_max.
inline void spd2_solve(double g11, double g12, double g22, double r1, double r2,
                       double& c1, double& c2, double rel_cut = 1e-12) {
  Eigen::Matrix2d G;
  G << g11, g12, g12, g22;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(G);
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  const double cut = rel_cut * std::max(lam(0), lam(1));
  Eigen::Vector2d r(r1, r2), c = Eigen::Vector2d::Zero();
  for (int k = 0; k < 2; ++k)
    if (lam(k) > cut && lam(k) > 0.0) c += V.col(k) * (V.col(k).dot(r) / lam(k));
  c1 = c(0);
  c2 = c(1);
}

// Least-squares Lagrange multipliers: minimize |grad F + pi + q H|_{L2} over
// constants (pi, q).  On a round sphere H is constant, the normal fields are
// linearly dependent, and the min-norm solution is returned.  The residual
// field is the constraint-tangential part of the gradient.
struct MultiplierFit {
  double pi = 0.0, q = 0.0;
  double residual_norm = 0.0;
  Field residual;
};

inline MultiplierFit fit_multipliers(const GeometryState& s, const Physics& p) {
  Field grad = l2_gradient(s, p);
  const double g11 = s.area();
  const double g12 = integrate(s, s.H);
  const double g22 = integrate(s, s.H * s.H);
  const double r1 = -integrate(s, grad);
  const double r2 = -integrate(s, grad * s.H);
  MultiplierFit fit;
  spd2_solve(g11, g12, g22, r1, r2, fit.pi, fit.q);
  fit.residual = grad + fit.pi + fit.q * s.H;
  fit.residual_norm = l2_norm(s, fit.residual);
  return fit;
}

}  // namespace helflow
