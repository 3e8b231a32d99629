#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "helflow/errors.hpp"
#include "helflow/fft.hpp"
#include "helflow/fields.hpp"
#include "helflow/surface.hpp"

namespace helflow {

// Reflection parity of a chart field on the sphere under the glide map
// (u,v) -> (2pi-u, v+pi), which identifies the doubled-in-u grid with the
// sphere.  Smooth scalars, the R^3 components of positions/normals, and
// tensor components with an even number of u-indices extend evenly; one
// u-index (g_uv, k_uv, du of a scalar, sqrt(g)) flips sign.  Torus grids
// ignore parity (plain double periodicity).
enum class Parity : int { Even = +1, Odd = -1 };

inline Parity flip(Parity p) {
  return p == Parity::Even ? Parity::Odd : Parity::Even;
}

// Tensor-product chart grid with spectral differentiation and quadrature,
// carrying the sampled reference fields.
//
// Layout: Field(i,j) = f(u_i, v_j).  Torus: u_i = 2pi i/n_u, exact
// trapezoid/FFT calculus.  Sphere: pole-free offset nodes
// u_i = (i+1/2) pi/n_u; derivatives and integrals go through the doubled
// grid u in (0,2pi), where the column pair (j, j+n_v/2) glues into one
// smooth periodic sample set with a parity sign.
struct Grid {
  ReferenceSurface ref;
  int nu = 0, nv = 0;
  double du = 0, dv = 0;
  Eigen::ArrayXd u, v;   // chart nodes
  Eigen::ArrayXd wu;     // u-quadrature weights (v-weight is the constant dv)

  // Sampled reference geometry (outward normal convention).
  Vec3Field X, N;
  Field g_uu, g_uv, g_vv, sqrtg;
  Field k_uu, k_uv, k_vv;
  Field H, K;

  SurfaceKind kind() const { return ref.kind; }
  double reach() const { return ref.reach(); }
  double admissible_bound() const { return 0.5 * ref.reach(); }

  void check_height(const Field& h) const {
    const double m = h.abs().maxCoeff();
    if (!(m < admissible_bound()))
      throw DomainError("height field inadmissible: max|h| = " +
                        std::to_string(m) + " exceeds reach/2 = " +
                        std::to_string(admissible_bound()));
    if (!h.isFinite().all()) throw DomainError("height field has non-finite entries");
  }

  // ---- spectral derivatives -------------------------------------------

  Field d_u(const Field& f, Parity par) const { return du_impl(f, par, 1); }
  Field d_uu(const Field& f, Parity par) const { return du_impl(f, par, 2); }
  Field d_v(const Field& f) const { return dv_impl(f, 1); }
  Field d_vv(const Field& f) const { return dv_impl(f, 2); }

  // ---- quadrature ------------------------------------------------------

  // sum_ij wu_i dv f_ij; exact for smooth chart densities (the u-weights
  // integrate the odd sine series that survives the v-average).
  double integrate_chart(const Field& f) const {
    double acc = 0.0;
    for (int i = 0; i < nu; ++i) {
      double row = 0.0;
      for (int j = 0; j < nv; ++j) row += f(i, j);
      acc += wu(i) * row;
    }
    return acc * dv;
  }

 private:
  // order-th u-derivative.
  Field du_impl(const Field& f, Parity par, int order) const {
    Field out(nu, nv);
    if (ref.kind == SurfaceKind::Torus) {
      std::vector<std::complex<double>> z(nu);
      for (int j = 0; j < nv; ++j) {
        for (int i = 0; i < nu; ++i) z[i] = f(i, j);
        spectral_derivative(z, order);
        for (int i = 0; i < nu; ++i) out(i, j) = z[i].real();
      }
      return out;
    }
    // Sphere: doubled columns.
    const int M = 2 * nu;
    const double s = par == Parity::Even ? 1.0 : -1.0;
    const double sgn_out = s * (order % 2 == 0 ? 1.0 : -1.0);
    std::vector<std::complex<double>> z(M);
    for (int j = 0; j < nv / 2; ++j) {
      const int j2 = j + nv / 2;
      for (int i = 0; i < nu; ++i) z[i] = f(i, j);
      for (int p = nu; p < M; ++p) z[p] = s * f(M - 1 - p, j2);
      spectral_derivative(z, order);
      for (int i = 0; i < nu; ++i) out(i, j) = z[i].real();
      for (int p = nu; p < M; ++p) out(M - 1 - p, j2) = sgn_out * z[p].real();
    }
    return out;
  }

  Field dv_impl(const Field& f, int order) const {
    Field out(nu, nv);
    std::vector<std::complex<double>> z(nv);
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) z[j] = f(i, j);
      spectral_derivative(z, order);
      for (int j = 0; j < nv; ++j) out(i, j) = z[j].real();
    }
    return out;
  }

  // In-place spectral d/dx of samples on a uniform period-2pi grid.  The
  // normalized inverse lives in Dft::inverse.  Offset grids need no special
  // handling (phases ride along with the coefficients); the Nyquist mode is
  // zeroed for odd orders.
  static void spectral_derivative(std::vector<std::complex<double>>& z,
                                  int order) {
    const int n = int(z.size());
    Dft::forward(z.data(), n);
    for (int m = 0; m < n; ++m) {
      double k = m <= n / 2 ? double(m) : double(m - n);
      std::complex<double> mult(1.0, 0.0);
      if (n % 2 == 0 && m == n / 2) {
        // Nyquist: derivative of the representable cosine component.
        if (order % 2 == 1)
          mult = 0.0;
        else
          for (int t = 0; t < order; t += 2) mult *= -k * k;
      } else {
        for (int t = 0; t < order; ++t) mult *= std::complex<double>(0.0, k);
      }
      z[size_t(m)] *= mult;
    }
    Dft::inverse(z.data(), n);
  }

};

// Geometry states keep their grid alive through shared ownership; build
// long-lived grids with make_grid.
using GridPtr = std::shared_ptr<const Grid>;

// Offset-node u-weights for the sphere: exact on q(u) = sin(k u), k <= n_u,
// i.e. on every smooth integrand the doubled representation can produce
// after v-averaging.  All weights are positive (Gibbs partial sums of the
// square wave stay positive on (0,pi)); this is asserted.
inline Eigen::ArrayXd polar_weights(int n) {
  Eigen::ArrayXd w(n);
  for (int i = 0; i < n; ++i) {
    const double th = (i + 0.5) * kPi / n;
    double acc = 0.0;
    for (int k = 1; k < n; k += 2) acc += std::sin(k * th) / double(k);
    acc *= 4.0 / double(n);
    if (n % 2 == 1) acc += 2.0 / double(n * n) * (i % 2 == 0 ? 1.0 : -1.0);
    w(i) = acc;
  }
  if (!(w > 0.0).all()) throw DomainError("polar quadrature weights not positive");
  return w;
}

inline Grid sample_grid(const ReferenceSurface& s, int nu, int nv) {
  if (nu < 8 || nv < 8)
    throw DomainError("grid too coarse: need n_u, n_v >= 8, got " +
                      std::to_string(nu) + "x" + std::to_string(nv));
  if (s.kind == SurfaceKind::Sphere && nv % 2 != 0)
    throw DomainError("sphere grids need even n_v (column doubling), got " +
                      std::to_string(nv));
  Grid g;
  g.ref = s;
  g.nu = nu;
  g.nv = nv;
  g.u.resize(nu);
  g.v.resize(nv);
  g.dv = 2.0 * kPi / nv;
  for (int j = 0; j < nv; ++j) g.v(j) = j * g.dv;

  if (s.kind == SurfaceKind::Sphere) {
    g.du = kPi / nu;
    for (int i = 0; i < nu; ++i) g.u(i) = (i + 0.5) * g.du;
    g.wu = polar_weights(nu);
  } else {
    g.du = 2.0 * kPi / nu;
    for (int i = 0; i < nu; ++i) g.u(i) = i * g.du;
    g.wu = Eigen::ArrayXd::Constant(nu, g.du);
  }

  auto alloc = [&](Field& f) { f.resize(nu, nv); };
  for (int c = 0; c < 3; ++c) {
    alloc(g.X[c]);
    alloc(g.N[c]);
  }
  alloc(g.g_uu); alloc(g.g_uv); alloc(g.g_vv); alloc(g.sqrtg);
  alloc(g.k_uu); alloc(g.k_uv); alloc(g.k_vv);
  alloc(g.H); alloc(g.K);

  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double uu = g.u(i), vv = g.v(j);
      if (s.kind == SurfaceKind::Sphere) {
        const double R = s.radius;
        const double st = std::sin(uu), ct = std::cos(uu);
        const double cp = std::cos(vv), sp = std::sin(vv);
        g.X[0](i, j) = R * st * cp;
        g.X[1](i, j) = R * st * sp;
        g.X[2](i, j) = R * ct;
        g.N[0](i, j) = st * cp;
        g.N[1](i, j) = st * sp;
        g.N[2](i, j) = ct;
        g.g_uu(i, j) = R * R;
        g.g_uv(i, j) = 0.0;
        g.g_vv(i, j) = R * R * st * st;
        g.sqrtg(i, j) = R * R * st;
        g.k_uu(i, j) = -R;
        g.k_uv(i, j) = 0.0;
        g.k_vv(i, j) = -R * st * st;
        g.H(i, j) = -2.0 / R;
        g.K(i, j) = 1.0 / (R * R);
      } else {
        const double a = s.major, r = s.minor;
        const double cu = std::cos(uu), su = std::sin(uu);
        const double cv = std::cos(vv), sv = std::sin(vv);
        const double A = a + r * cv;
        g.X[0](i, j) = A * cu;
        g.X[1](i, j) = A * su;
        g.X[2](i, j) = r * sv;
        g.N[0](i, j) = cv * cu;
        g.N[1](i, j) = cv * su;
        g.N[2](i, j) = sv;
        g.g_uu(i, j) = A * A;
        g.g_uv(i, j) = 0.0;
        g.g_vv(i, j) = r * r;
        g.sqrtg(i, j) = A * r;
        g.k_uu(i, j) = -A * cv;
        g.k_uv(i, j) = 0.0;
        g.k_vv(i, j) = -r;
        g.H(i, j) = -cv / A - 1.0 / r;
        g.K(i, j) = cv / (r * A);
      }
    }
  }
  return g;
}

inline GridPtr make_grid(const ReferenceSurface& s, int nu, int nv) {
  return std::make_shared<const Grid>(sample_grid(s, nu, nv));
}

}  // namespace helflow
