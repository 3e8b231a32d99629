#pragma once

#include "helflow/energy.hpp"

// Evolution identities of the fundamental fields under normal motion, the
// linearization of the L2-gradient, and the second-variation form.  All
// rates are material derivatives in convected chart coordinates (the grid
// indices act as material labels; moving nodes along the normal and
// differencing componentwise realizes exactly these rates).

namespace helflow {

struct MaterialDerivatives {
  Field g_uu, g_uv, g_vv;        // -2 w k_ab
  Field gi_uu, gi_uv, gi_vv;     // +2 w k^ab
  Field k_uu, k_uv, k_vv;        // w_{;ab} - w k_ac k^c_b
  Field kup_uu, kup_uv, kup_vv;  // w_;^{ab} + 3 w k^ac k_c^b
  Field sqrtg;                   // -w H sqrt(g)
  Field H;                       // Lap w + w (H^2 - 2K)
  Field K;                       // w K H + H Lap w - k^ab w_{;ab}
  Field G_uuu, G_uuv, G_uvv;     // -k^c_a w_b - k^c_b w_a + k_ab w^c - w k^c_{a;b}
  Field G_vuu, G_vuv, G_vvv;
  Field lapH;                    // rate of Lap H, fourth order in w
};

// nabla_c k_ab, all six chart components (totally symmetric up to
// discretization, a useful cross-check).
struct CovDK {
  Field uu_u, uu_v, uv_u, uv_v, vv_u, vv_v;
};

inline CovDK covariant_dk(const GeometryState& s) {
  const Grid& g = *s.grid;
  CovDK d;
  Field kuu_u = g.d_u(s.k_uu, Parity::Even), kuu_v = g.d_v(s.k_uu);
  Field kuv_u = g.d_u(s.k_uv, Parity::Odd), kuv_v = g.d_v(s.k_uv);
  Field kvv_u = g.d_u(s.k_vv, Parity::Even), kvv_v = g.d_v(s.k_vv);
  d.uu_u = kuu_u - 2.0 * (s.G_uuu * s.k_uu + s.G_vuu * s.k_uv);
  d.uu_v = kuu_v - 2.0 * (s.G_uuv * s.k_uu + s.G_vuv * s.k_uv);
  d.uv_u = kuv_u - (s.G_uuu * s.k_uv + s.G_vuu * s.k_vv) -
           (s.G_uuv * s.k_uu + s.G_vuv * s.k_uv);
  d.uv_v = kuv_v - (s.G_uuv * s.k_uv + s.G_vuv * s.k_vv) -
           (s.G_uvv * s.k_uu + s.G_vvv * s.k_uv);
  d.vv_u = kvv_u - 2.0 * (s.G_uuv * s.k_uv + s.G_vuv * s.k_vv);
  d.vv_v = kvv_v - 2.0 * (s.G_uvv * s.k_uv + s.G_vvv * s.k_vv);
  return d;
}

inline MaterialDerivatives material_derivatives(const GeometryState& s,
                                                const Field& w) {
  check_same_grid(s, w);
  const Grid& g = *s.grid;
  MaterialDerivatives d;

  d.g_uu = -2.0 * w * s.k_uu;
  d.g_uv = -2.0 * w * s.k_uv;
  d.g_vv = -2.0 * w * s.k_vv;
  d.gi_uu = 2.0 * w * s.kup_uu;
  d.gi_uv = 2.0 * w * s.kup_uv;
  d.gi_vv = 2.0 * w * s.kup_vv;

  CovHess cw = covariant_hessian(s, w, Parity::Even);
  // k_ac k^c_b (both indices low) and k^ac k_c^b (both high)
  Field kk_uu = s.k_uu * s.km_uu + s.k_uv * s.km_vu;
  Field kk_uv = s.k_uu * s.km_uv + s.k_uv * s.km_vv;
  Field kk_vv = s.k_uv * s.km_uv + s.k_vv * s.km_vv;
  d.k_uu = cw.uu - w * kk_uu;
  d.k_uv = cw.uv - w * kk_uv;
  d.k_vv = cw.vv - w * kk_vv;

  Field chu_uu = s.gi_uu * cw.uu + s.gi_uv * cw.uv;  // w_{;u}^{~b} helpers
  Field chu_uv = s.gi_uu * cw.uv + s.gi_uv * cw.vv;
  Field chv_uu = s.gi_uv * cw.uu + s.gi_vv * cw.uv;
  Field chv_uv = s.gi_uv * cw.uv + s.gi_vv * cw.vv;
  Field wup_uu = s.gi_uu * chu_uu + s.gi_uv * chu_uv;
  Field wup_uv = s.gi_uv * chu_uu + s.gi_vv * chu_uv;
  Field wup_vv = s.gi_uv * chv_uu + s.gi_vv * chv_uv;
  Field kk2_uu = s.kup_uu * s.km_uu + s.kup_uv * s.km_uv;
  Field kk2_uv = s.kup_uu * s.km_vu + s.kup_uv * s.km_vv;
  Field kk2_vv = s.kup_uv * s.km_vu + s.kup_vv * s.km_vv;
  d.kup_uu = wup_uu + 3.0 * w * kk2_uu;
  d.kup_uv = wup_uv + 3.0 * w * kk2_uv;
  d.kup_vv = wup_vv + 3.0 * w * kk2_vv;

  Field lapw = s.gi_uu * cw.uu + 2.0 * s.gi_uv * cw.uv + s.gi_vv * cw.vv;
  d.sqrtg = -w * s.H * s.sqrtg;
  d.H = lapw + w * (s.H * s.H - 2.0 * s.K);
  Field kdotcw = s.kup_uu * cw.uu + 2.0 * s.kup_uv * cw.uv + s.kup_vv * cw.vv;
  d.K = w * s.K * s.H + s.H * lapw - kdotcw;

  // connection rate
  Field wu = g.d_u(w, Parity::Even), wv = g.d_v(w);
  Field wU = s.gi_uu * wu + s.gi_uv * wv;
  Field wV = s.gi_uv * wu + s.gi_vv * wv;
  CovDK ck = covariant_dk(s);
  auto kraise_u = [&](const Field& ku, const Field& kv) {
    return Field(s.gi_uu * ku + s.gi_uv * kv);
  };
  auto kraise_v = [&](const Field& ku, const Field& kv) {
    return Field(s.gi_uv * ku + s.gi_vv * kv);
  };
  // k^u_{a;b}: raise the first index of nabla_b k_{.a}
  Field ku_uu = kraise_u(ck.uu_u, ck.uv_u);  // k^u_{u;u}
  Field ku_uv = kraise_u(ck.uu_v, ck.uv_v);  // k^u_{u;v}
  Field ku_vv = kraise_u(ck.uv_v, ck.vv_v);  // k^u_{v;v}
  Field kv_uu = kraise_v(ck.uu_u, ck.uv_u);
  Field kv_uv = kraise_v(ck.uu_v, ck.uv_v);
  Field kv_vv = kraise_v(ck.uv_v, ck.vv_v);
  d.G_uuu = -2.0 * s.km_uu * wu + s.k_uu * wU - w * ku_uu;
  d.G_uuv = -s.km_uu * wv - s.km_uv * wu + s.k_uv * wU - w * ku_uv;
  d.G_uvv = -2.0 * s.km_uv * wv + s.k_vv * wU - w * ku_vv;
  d.G_vuu = -2.0 * s.km_vu * wu + s.k_uu * wV - w * kv_uu;
  d.G_vuv = -s.km_vu * wv - s.km_vv * wu + s.k_uv * wV - w * kv_uv;
  d.G_vvv = -2.0 * s.km_vv * wv + s.k_vv * wV - w * kv_vv;

  // rate of Lap H
  Field Hu = g.d_u(s.H, Parity::Even), Hv = g.d_v(s.H);
  Field Ku = g.d_u(s.K, Parity::Even), Kv = g.d_v(s.K);
  Field HU = s.gi_uu * Hu + s.gi_uv * Hv;
  Field HV = s.gi_uv * Hu + s.gi_vv * Hv;
  Field KU = s.gi_uu * Ku + s.gi_uv * Kv;
  Field KV = s.gi_uv * Ku + s.gi_vv * Kv;
  Field Au = 2.0 * (s.kup_uu * Hu + s.kup_uv * Hv) + 3.0 * s.H * HU - 4.0 * KU;
  Field Av = 2.0 * (s.kup_uv * Hu + s.kup_vv * Hv) + 3.0 * s.H * HV - 4.0 * KV;
  CovHess cH = covariant_hessian(s, s.H, Parity::Even);
  Field kdotcH = s.kup_uu * cH.uu + 2.0 * s.kup_uv * cH.uv + s.kup_vv * cH.vv;
  Field Hsq2K = s.H * s.H - 2.0 * s.K;
  d.lapH = laplace_beltrami(s, lapw) + lapw * Hsq2K + wu * Au + wv * Av +
           w * (2.0 * kdotcH + Hu * HU + Hv * HV +
                laplace_beltrami(s, Hsq2K));
  return d;
}

// Coefficient fields of the linearized gradient and of the second-variation
// form.  b_curv_div is the divergence-of-curvature-gradient contribution to
// b, kept separate because dropping it is a known failure mode.
struct HessianCoefficients {
  Field a_uu, a_uv, a_vv;  // a^{ab}, contravariant, symmetric
  Field b;                 // zeroth-order coefficient of the quadratic form
  Field btilde;            // zeroth-order coefficient of the linearization
  Field b_curv_div;        // ((2k^{ab} - H g^{ab}) H_{,a})_{;b}
};

inline HessianCoefficients hessian_coefficients(const GeometryState& s,
                                                const Physics& p) {
  const Grid& g = *s.grid;
  const double c0 = p.c0;
  HessianCoefficients c;
  Field ascal =
      0.5 * s.H * s.H - 4.0 * s.K + 2.0 * s.H * c0 - 0.5 * c0 * c0;
  c.a_uu = ascal * s.gi_uu + 2.0 * (s.H - c0) * s.kup_uu;
  c.a_uv = ascal * s.gi_uv + 2.0 * (s.H - c0) * s.kup_uv;
  c.a_vv = ascal * s.gi_vv + 2.0 * (s.H - c0) * s.kup_vv;

  Field Hu = g.d_u(s.H, Parity::Even), Hv = g.d_v(s.H);
  Field Vu = (2.0 * s.kup_uu - s.H * s.gi_uu) * Hu +
             (2.0 * s.kup_uv - s.H * s.gi_uv) * Hv;
  Field Vv = (2.0 * s.kup_uv - s.H * s.gi_uv) * Hu +
             (2.0 * s.kup_vv - s.H * s.gi_vv) * Hv;
  c.b_curv_div = divergence(s, Vu, Vv, Parity::Odd);

  Field Hsq2K = s.H * s.H - 2.0 * s.K;
  Field lapHsq2K = laplace_beltrami(s, Hsq2K);
  Field H2 = s.H * s.H;
  c.b = c.b_curv_div + lapHsq2K + H2 * H2 - 5.0 * s.K * H2 +
        4.0 * s.K * s.K + c0 * c0 * s.K;

  CovHess cH = covariant_hessian(s, s.H, Parity::Even);
  Field kdotcH = s.kup_uu * cH.uu + 2.0 * s.kup_uv * cH.uv + s.kup_vv * cH.vv;
  c.btilde = 2.0 * kdotcH + lapHsq2K + grad_inner(s, s.H, Parity::Even, s.H, Parity::Even) +
             1.5 * H2 * H2 - 7.0 * s.K * H2 + 4.0 * s.K * s.K +
             2.0 * c0 * s.K * s.H - 0.5 * c0 * c0 * H2 + c0 * c0 * s.K;
  return c;
}

// Material derivative of the L2-gradient along normal speed w:
// kappa (Lap^2 w + (a^{ab} w_{,a})_{;b} + btilde w).
inline Field linearized_gradient(const GeometryState& s, const Physics& p,
                                 const Field& w) {
  check_same_grid(s, w);
  const Grid& g = *s.grid;
  HessianCoefficients c = hessian_coefficients(s, p);
  Field wu = g.d_u(w, Parity::Even), wv = g.d_v(w);
  Field Au = c.a_uu * wu + c.a_uv * wv;
  Field Av = c.a_uv * wu + c.a_vv * wv;
  return p.kappa * (laplace2(s, w) + divergence(s, Au, Av, Parity::Odd) +
                    c.btilde * w);
}

// Second variation of F under normal speeds w, wt:
//   d2F(w, wt) = kappa int (Lap w Lap wt - a^{ab} w_{,a} wt_{,b} + b w wt) dA.
// The sign of the gradient term is fixed by integrating the linearization
// by parts against wt and adding the dA-rate coupling; the constant-speed
// spectrum on the round sphere (translations in the kernel) pins it down.
// The operand/coefficient overloads serve dense matrix assembly, where the
// coefficient fields and the per-direction derivatives are shared across
// all basis pairs.
struct VariationOperand {
  Field w, lap, du, dv;
};

inline VariationOperand variation_operand(const GeometryState& s,
                                          const Field& w) {
  check_same_grid(s, w);
  const Grid& g = *s.grid;
  return {w, laplace_beltrami(s, w), g.d_u(w, Parity::Even), g.d_v(w)};
}

inline double second_variation(const GeometryState& s,
                               const HessianCoefficients& c, double kappa,
                               const VariationOperand& a,
                               const VariationOperand& b) {
  Field across = c.a_uu * a.du * b.du + c.a_uv * (a.du * b.dv + a.dv * b.du) +
                 c.a_vv * a.dv * b.dv;
  return kappa * integrate(s, a.lap * b.lap - across + c.b * a.w * b.w);
}

inline double second_variation(const GeometryState& s,
                               const HessianCoefficients& c, double kappa,
                               const Field& w, const Field& wt) {
  return second_variation(s, c, kappa, variation_operand(s, w),
                          variation_operand(s, wt));
}

inline double second_variation(const GeometryState& s, const Physics& p,
                               const Field& w, const Field& wt) {
  return second_variation(s, hessian_coefficients(s, p), p.kappa, w, wt);
}

}  // namespace helflow
