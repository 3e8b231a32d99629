#pragma once

#include <Eigen/Dense>

#include "helflow/constraints.hpp"
#include "helflow/fft.hpp"

// Linear algebra for the semi-implicit step: solve
//   (Minv + tau kappa Lap^2) w = rhs
// with Minv = I (L2 mobility) or I - ell^2 Lap (screened H^-1 proxy).
// BiCGStab on the spectrally applied operator; preconditioning by a
// constant-coefficient Fourier symbol on the torus and by a lagged dense LU
// of the assembled operator on the sphere (the 1/sin^2 metric contrast near
// the poles defeats any constant-coefficient symbol).  Everything is
// sequential and free of timing dependence, so repeated runs are
// bit-identical.

namespace helflow {

struct MobilitySpec {
  enum class Kind { L2, HinvProxy };
  Kind kind = Kind::L2;
  double ell = 0.5;  // screening length of the proxy
};

inline const char* to_string(MobilitySpec::Kind k) {
  return k == MobilitySpec::Kind::L2 ? "l2" : "hinv";
}

// M^{-1} w: the dissipation operator of the chosen mobility
inline Field apply_minv(const GeometryState& s, const MobilitySpec& mob,
                        const Field& w) {
  if (mob.kind == MobilitySpec::Kind::L2) return w;
  return w - (mob.ell * mob.ell) * laplace_beltrami(s, w);
}

class ImplicitSolver {
 public:
  explicit ImplicitSolver(GridPtr grid) : grid_(std::move(grid)) {}

  // Solve (Minv + tau kappa Lap^2) w = rhs.  Throws DomainError when the
  // iteration stalls even after refreshing the preconditioner.
  Field solve(const GeometryState& s, const MobilitySpec& mob, double tau,
              double kappa, const Field& rhs) {
    check_same_grid(s, rhs);
    auto apply = [&](const Field& w) {
      return Field(apply_minv(s, mob, w) +
                   (tau * kappa) * laplace2(s, w));
    };
    const bool sphere = grid_->ref.kind == SurfaceKind::Sphere;
    if (sphere && !have_lu_) rebuild_lu(s, mob, tau, kappa);

    auto precond = [&](const Field& r) {
      return sphere ? apply_lu(r) : apply_symbol(s, mob, tau, kappa, r);
    };
    Field w(rhs.rows(), rhs.cols());
    if (bicgstab(apply, precond, rhs, w)) {
      // lagged factorization going stale (geometry/step drift): refresh for
      // the next call once the iteration count creeps up
      if (sphere && last_iterations > 40) have_lu_ = false;
      return w;
    }
    if (sphere) {
      rebuild_lu(s, mob, tau, kappa);
      if (bicgstab(apply, precond, rhs, w)) return w;
    }
    throw DomainError("implicit velocity solve failed to converge");
  }

  int last_iterations = 0;
  int lu_rebuilds = 0;

 private:
  GridPtr grid_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  bool have_lu_ = false;

  void rebuild_lu(const GeometryState& s, const MobilitySpec& mob, double tau,
                  double kappa) {
    const int n = grid_->nu * grid_->nv;
    Eigen::MatrixXd A(n, n);
    Field e = Field::Zero(grid_->nu, grid_->nv);
    for (int j = 0; j < n; ++j) {
      e.data()[j] = 1.0;
      Field col = apply_minv(s, mob, e) + (tau * kappa) * laplace2(s, e);
      A.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
      e.data()[j] = 0.0;
    }
    lu_.compute(A);
    have_lu_ = true;
    ++lu_rebuilds;
  }

  Field apply_lu(const Field& r) const {
    const int n = grid_->nu * grid_->nv;
    Eigen::VectorXd x =
        lu_.solve(Eigen::Map<const Eigen::VectorXd>(r.data(), n));
    Field out(grid_->nu, grid_->nv);
    Eigen::Map<Eigen::VectorXd>(out.data(), n) = x;
    return out;
  }

  // mean-coefficient Fourier symbol inverse (torus): the operator with the
  // area-averaged inverse metric is diagonal in modes
  Field apply_symbol(const GeometryState& s, const MobilitySpec& mob,
                     double tau, double kappa, const Field& r) const {
    const int nu = grid_->nu, nv = grid_->nv;
    const double atot = integrate_chart_plain(s.sqrtg);
    const double giu = integrate_chart_plain(s.gi_uu * s.sqrtg) / atot;
    const double giv = integrate_chart_plain(s.gi_vv * s.sqrtg) / atot;

    std::vector<std::complex<double>> buf(std::max(nu, nv));
    // 2-D FFT, u then v
    Eigen::ArrayXX<std::complex<double>> fh(nu, nv);
    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) buf[i] = r(i, j);
      Dft::forward(buf.data(), nu);
      for (int i = 0; i < nu; ++i) fh(i, j) = buf[i];
    }
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) buf[j] = fh(i, j);
      Dft::forward(buf.data(), nv);
      for (int j = 0; j < nv; ++j) fh(i, j) = buf[j];
    }
    for (int i = 0; i < nu; ++i) {
      const double p = wavenumber(i, nu);
      for (int j = 0; j < nv; ++j) {
        const double q = wavenumber(j, nv);
        const double lam = giu * p * p + giv * q * q;
        double m = 1.0;
        if (mob.kind == MobilitySpec::Kind::HinvProxy)
          m += mob.ell * mob.ell * lam;
        fh(i, j) /= (m + tau * kappa * lam * lam);
      }
    }
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) buf[j] = fh(i, j);
      Dft::inverse(buf.data(), nv);
      for (int j = 0; j < nv; ++j) fh(i, j) = buf[j];
    }
    Field out(nu, nv);
    for (int j = 0; j < nv; ++j) {
      for (int i = 0; i < nu; ++i) buf[i] = fh(i, j);
      Dft::inverse(buf.data(), nu);
      for (int i = 0; i < nu; ++i) out(i, j) = buf[i].real();
    }
    return out;
  }

  static double wavenumber(int i, int n) {
    int k = i <= n / 2 ? i : i - n;
    return static_cast<double>(k);
  }

  static double integrate_chart_plain(const Field& f) { return f.sum(); }

  template <class Op, class Pc>
  bool bicgstab(const Op& apply, const Pc& precond, const Field& b, Field& x) {
    const double bnorm = std::sqrt((b * b).sum());
    x.setZero();
    if (bnorm == 0.0) {
      last_iterations = 0;
      return true;
    }
    const double tol = 1e-12 * bnorm;
    Field r = b;  // x = 0
    Field rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    Field v = Field::Zero(b.rows(), b.cols());
    Field p = v;
    for (int it = 1; it <= 400; ++it) {
      const double rho1 = (rhat * r).sum();
      if (rho1 == 0.0) break;
      if (it == 1) {
        p = r;
      } else {
        const double beta = (rho1 / rho) * (alpha / omega);
        p = r + beta * (p - omega * v);
      }
      rho = rho1;
      Field ph = precond(p);
      v = apply(ph);
      const double rhv = (rhat * v).sum();
      if (rhv == 0.0) break;
      alpha = rho / rhv;
      Field sres = r - alpha * v;
      if (std::sqrt((sres * sres).sum()) < tol) {
        x += alpha * ph;
        last_iterations = it;
        return true;
      }
      Field sh = precond(sres);
      Field t = apply(sh);
      const double tt = (t * t).sum();
      if (tt == 0.0) break;
      omega = (t * sres).sum() / tt;
      x += alpha * ph + omega * sh;
      r = sres - omega * t;
      if (std::sqrt((r * r).sum()) < tol) {
        last_iterations = it;
        return true;
      }
      if (omega == 0.0) break;
    }
    last_iterations = 400;
    return false;
  }
};

}  // namespace helflow
