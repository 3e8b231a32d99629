#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

#include "helflow/constraints.hpp"
#include "helflow/harmonics.hpp"
#include "helflow/hessian.hpp"

// Finite-dimensional stability analysis: the second-variation form restricted
// to a constraint-projected, L2-orthonormalized family of smooth fields gives
// a dense symmetric matrix whose near-kernel is compared against the normal
// components of the Euclidean symmetry fields.  The smallest eigenvalue
// transverse to the near-kernel is the quantity separating exponential from
// algebraic decay phenomenology.

namespace helflow {

struct SpectraParams {
  double drop_tol = 1e-8;           // rank threshold after projection
  double stationarity_bound = 1e-3; // residual above which a warning is set
};

struct HessianAssembly {
  Eigen::MatrixXd M;  // symmetrized
  double max_asymmetry = 0.0;
  std::vector<Field> basis;  // projected, L2(dA)-orthonormal
  std::vector<std::string> labels;
  std::vector<std::string> dropped;  // rank-deficient directions
  double stationarity_residual = 0.0;  // ||projected grad||_{L2}
  bool stationary_warning = false;
};

// Project, orthonormalize, and assemble M_pq = d2F(e_p, e_q).  Degenerate
// directions (annihilated by the constraint projection or linearly dependent
// on earlier fields) are dropped and reported by label.
inline HessianAssembly assemble_hessian(const GeometryState& s,
                                        const Physics& p,
                                        const std::vector<BasisField>& raw,
                                        const ComponentTargets& tgt,
                                        const SpectraParams& sp = {}) {
  HessianAssembly out;
  out.stationarity_residual =
      l2_norm(s, project_tangent(s, l2_gradient(s, p), tgt));
  out.stationary_warning = out.stationarity_residual > sp.stationarity_bound;

  for (const BasisField& bf : raw) {
    Field r = project_tangent(s, bf.f, tgt);
    const double n0 = std::max(l2_norm(s, bf.f), 1e-30);
    // modified Gram-Schmidt, two passes for orthogonality at roundoff level
    for (int pass = 0; pass < 2; ++pass)
      for (const Field& e : out.basis) r -= integrate(s, r * e) * e;
    const double nr = l2_norm(s, r);
    if (nr <= sp.drop_tol * n0) {
      out.dropped.push_back(bf.label);
      continue;
    }
    out.basis.push_back(r / nr);
    out.labels.push_back(bf.label);
  }

  const int n = int(out.basis.size());
  out.M.resize(n, n);
  const HessianCoefficients coef = hessian_coefficients(s, p);
  std::vector<VariationOperand> ops;
  ops.reserve(size_t(n));
  for (const Field& e : out.basis) ops.push_back(variation_operand(s, e));
  for (int ip = 0; ip < n; ++ip)
    for (int iq = 0; iq < n; ++iq)
      out.M(ip, iq) = second_variation(s, coef, p.kappa, ops[size_t(ip)],
                                       ops[size_t(iq)]);
  double asym = 0.0, mmax = 0.0;
  for (int ip = 0; ip < n; ++ip)
    for (int iq = 0; iq < n; ++iq) {
      asym = std::max(asym, std::abs(out.M(ip, iq) - out.M(iq, ip)));
      mmax = std::max(mmax, std::abs(out.M(ip, iq)));
    }
  out.max_asymmetry = asym;
  out.M = 0.5 * (out.M + out.M.transpose()).eval();
  return out;
}

inline HessianAssembly assemble_hessian(const GeometryState& s,
                                        const Physics& p, int max_degree,
                                        const ComponentTargets& tgt,
                                        const SpectraParams& sp = {}) {
  return assemble_hessian(s, p, harmonic_basis(*s.grid, max_degree), tgt, sp);
}

// ---- symmetry fields ------------------------------------------------------

struct SymmetryField {
  Field f;
  std::string label;
  bool vanishing = false;  // identically zero (up to roundoff)
};

// Normal components of the Euclidean Killing fields on the realized surface:
// w_c = nu . c for translations, w_omega = nu . (omega x x) for rotations.
// Directions that vanish identically (rotations of a round sphere, the axial
// rotation of a surface of revolution) are flagged.
inline std::vector<SymmetryField> symmetry_fields(const GeometryState& s) {
  std::vector<SymmetryField> out;
  const char* axes = "xyz";
  const double scale = std::sqrt(dot(s.P, s.P).maxCoeff());
  for (int c = 0; c < 3; ++c) {
    SymmetryField w;
    w.f = s.nrm[c];
    w.label = std::string("translation_") + axes[c];
    w.vanishing = w.f.abs().maxCoeff() <= 1e-10;
    out.push_back(std::move(w));
  }
  for (int c = 0; c < 3; ++c) {
    const int a = (c + 1) % 3, b = (c + 2) % 3;
    SymmetryField w;
    // e_c x P = P_a e_b - P_b e_a, so nu . (e_c x P) has two terms
    w.f = s.nrm[b] * s.P[a] - s.nrm[a] * s.P[b];
    w.label = std::string("rotation_") + axes[c];
    w.vanishing = w.f.abs().maxCoeff() <= 1e-10 * std::max(scale, 1.0);
    out.push_back(std::move(w));
  }
  return out;
}

// Coefficients of a field in the assembled orthonormal basis, with the
// relative remainder outside the span.
struct BasisExpansion {
  Eigen::VectorXd coeff;
  double residual_rel = 0.0;
};

inline BasisExpansion expand_in_basis(const GeometryState& s,
                                      const std::vector<Field>& basis,
                                      const Field& w) {
  BasisExpansion out;
  out.coeff.resize(long(basis.size()));
  Field r = w;
  for (size_t i = 0; i < basis.size(); ++i) {
    out.coeff(long(i)) = integrate(s, w * basis[i]);
    r -= out.coeff(long(i)) * basis[i];
  }
  const double nw = l2_norm(s, w);
  out.residual_rel = nw > 0.0 ? l2_norm(s, r) / nw : 0.0;
  return out;
}

// ---- spectrum report ------------------------------------------------------

struct SpectrumReport {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // columns match eigenvalues
  double tol = 0.0;                 // relative near-kernel threshold
  double cutoff_abs = 0.0;          // tol * max|lambda|
  int near_kernel_dim = 0;
  // principal angles (radians) between the near-kernel and the span of the
  // provided symmetry coefficient vectors; one angle per symmetry-span
  // dimension, pi/2 entries when the near-kernel is too small to contain it
  std::vector<double> principal_angles;
  bool has_transverse = false;
  double smallest_transverse = 0.0;  // signed; most negative first
  std::vector<double> symmetry_rayleigh;  // w^T M w / w^T w per input vector
};

inline SpectrumReport spectrum_report(
    const Eigen::MatrixXd& M, const std::vector<Eigen::VectorXd>& sym_coeffs,
    double tol) {
  const int n = int(M.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw DomainError("spectrum: dense symmetric eigensolve failed");
  SpectrumReport rep;
  rep.tol = tol;
  rep.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  rep.eigenvectors = es.eigenvectors();
  const double lmax = n > 0 ? std::max(std::abs(rep.eigenvalues.front()),
                                       std::abs(rep.eigenvalues.back()))
                            : 0.0;
  rep.cutoff_abs = tol * lmax;
  for (int i = 0; i < n; ++i)
    if (std::abs(rep.eigenvalues[size_t(i)]) <= rep.cutoff_abs)
      ++rep.near_kernel_dim;
  for (int i = 0; i < n; ++i) {
    if (std::abs(rep.eigenvalues[size_t(i)]) > rep.cutoff_abs) {
      rep.has_transverse = true;
      rep.smallest_transverse = rep.eigenvalues[size_t(i)];
      break;
    }
  }

  for (const Eigen::VectorXd& c : sym_coeffs) {
    const double den = c.squaredNorm();
    rep.symmetry_rayleigh.push_back(den > 0.0 ? c.dot(M * c) / den : 0.0);
  }

  // principal angles via the SVD of Q_kernel^T Q_sym
  if (!sym_coeffs.empty() && n > 0) {
    Eigen::MatrixXd S(n, long(sym_coeffs.size()));
    for (size_t j = 0; j < sym_coeffs.size(); ++j) S.col(long(j)) = sym_coeffs[j];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(S);
    qr.setThreshold(1e-10);
    const int r = int(qr.rank());
    Eigen::MatrixXd Qs =
        Eigen::MatrixXd(qr.householderQ()).leftCols(r);
    const int k = rep.near_kernel_dim;
    Eigen::MatrixXd Qk(n, k);
    int col = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(rep.eigenvalues[size_t(i)]) <= rep.cutoff_abs)
        Qk.col(col++) = rep.eigenvectors.col(i);
    if (k > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qk.transpose() * Qs);
      const auto& sv = svd.singularValues();
      for (int i = 0; i < sv.size(); ++i)
        rep.principal_angles.push_back(
            std::acos(std::min(1.0, std::max(-1.0, sv(i)))));
    }
    // symmetry directions the kernel cannot host at all
    for (int i = int(rep.principal_angles.size()); i < r; ++i)
      rep.principal_angles.push_back(0.5 * kPi);
  }
  return rep;
}

// Full pipeline: expand the non-vanishing symmetry fields (constraint-
// projected, like the basis itself) in the assembled basis, record how well
// the basis represents them, and run the dense analysis.
struct SymmetryExpansion {
  std::string label;
  Eigen::VectorXd coeff;
  double residual_rel = 0.0;  // remainder outside the basis span
};

struct SpectrumAnalysis {
  SpectrumReport report;
  std::vector<SymmetryExpansion> symmetries;
};

inline SpectrumAnalysis analyze_spectrum(const GeometryState& s,
                                         const HessianAssembly& asmb,
                                         const ComponentTargets& tgt,
                                         double tol = 1e-6) {
  SpectrumAnalysis out;
  std::vector<Eigen::VectorXd> coeffs;
  for (const SymmetryField& sym : symmetry_fields(s)) {
    if (sym.vanishing) continue;
    const Field w = project_tangent(s, sym.f, tgt);
    if (l2_norm(s, w) <= 1e-10 * std::max(l2_norm(s, sym.f), 1e-30)) continue;
    BasisExpansion ex = expand_in_basis(s, asmb.basis, w);
    out.symmetries.push_back({sym.label, ex.coeff, ex.residual_rel});
    coeffs.push_back(std::move(ex.coeff));
  }
  out.report = spectrum_report(asmb.M, coeffs, tol);
  return out;
}

}  // namespace helflow
