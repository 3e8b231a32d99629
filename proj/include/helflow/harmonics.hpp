#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "helflow/grid.hpp"

namespace helflow {

// Associated Legendre P_l^m(x) with the Condon-Shortley phase.
inline double assoc_legendre(int l, int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    double somx2 = std::sqrt((1.0 - x) * (1.0 + x));
    double fact = 1.0;
    for (int i = 1; i <= m; ++i) {
      pmm *= -fact * somx2;
      fact += 2.0;
    }
  }
  if (l == m) return pmm;
  double pmmp1 = x * (2.0 * m + 1.0) * pmm;
  if (l == m + 1) return pmmp1;
  double pll = 0.0;
  for (int ll = m + 2; ll <= l; ++ll) {
    pll = (x * (2.0 * ll - 1.0) * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
    pmm = pmmp1;
    pmmp1 = pll;
  }
  return pll;
}

// Real spherical harmonic, orthonormal in L2 of the unit sphere:
// m > 0 pairs with cos(m v), m < 0 with sin(|m| v).
inline double real_sph_harm(int l, int m, double theta, double phi) {
  const int am = std::abs(m);
  double norm = (2.0 * l + 1.0) / (4.0 * kPi);
  for (int k = l - am + 1; k <= l + am; ++k) norm /= double(k);
  norm = std::sqrt(norm);
  const double p = assoc_legendre(l, am, std::cos(theta));
  if (m == 0) return norm * p;
  const double sq2 = std::sqrt(2.0);
  return m > 0 ? sq2 * norm * p * std::cos(am * phi)
               : sq2 * norm * p * std::sin(am * phi);
}

inline Field sphere_harmonic_field(const Grid& g, int l, int m) {
  Field f(g.nu, g.nv);
  for (int i = 0; i < g.nu; ++i)
    for (int j = 0; j < g.nv; ++j)
      f(i, j) = real_sph_harm(l, m, g.u(i), g.v(j));
  return f;
}

inline Field torus_mode_field(const Grid& g, int ku, int kv, bool sine) {
  Field f(g.nu, g.nv);
  for (int i = 0; i < g.nu; ++i)
    for (int j = 0; j < g.nv; ++j) {
      const double ph = ku * g.u(i) + kv * g.v(j);
      f(i, j) = sine ? std::sin(ph) : std::cos(ph);
    }
  return f;
}

struct BasisField {
  Field f;
  std::string label;
};

// Smooth low-frequency basis used for Hessian spectra and perturbations:
// real spherical harmonics through max_degree, or torus Fourier modes with
// max(|ku|,|kv|) <= max_degree (constant mode included in both).
inline std::vector<BasisField> harmonic_basis(const Grid& g, int max_degree) {
  std::vector<BasisField> out;
  if (g.kind() == SurfaceKind::Sphere) {
    for (int l = 0; l <= max_degree; ++l)
      for (int m = -l; m <= l; ++m)
        out.push_back({sphere_harmonic_field(g, l, m),
                       "Y_" + std::to_string(l) + "_" + std::to_string(m)});
  } else {
    out.push_back({Field::Ones(g.nu, g.nv), "const"});
    for (int ku = 0; ku <= max_degree; ++ku)
      for (int kv = -max_degree; kv <= max_degree; ++kv) {
        if (ku == 0 && kv <= 0) continue;  // one representative per pair
        out.push_back({torus_mode_field(g, ku, kv, false),
                       "cos(" + std::to_string(ku) + "u" +
                           (kv >= 0 ? "+" : "") + std::to_string(kv) + "v)"});
        out.push_back({torus_mode_field(g, ku, kv, true),
                       "sin(" + std::to_string(ku) + "u" +
                           (kv >= 0 ? "+" : "") + std::to_string(kv) + "v)"});
      }
  }
  return out;
}

// Deterministic smooth random field: seeded combination of the low basis.
inline Field random_smooth_field(const Grid& g, std::uint64_t seed,
                                 double amplitude, int max_degree = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<BasisField> basis = harmonic_basis(g, max_degree);
  Field f = Field::Zero(g.nu, g.nv);
  for (const auto& b : basis) f += nd(rng) * b.f;
  const double m = f.abs().maxCoeff();
  if (m > 0) f *= amplitude / m;
  return f;
}

}  // namespace helflow
