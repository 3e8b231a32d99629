#pragma once

#include <string>

#include "helflow/grid.hpp"

namespace helflow {

// Pointwise geometry of a realized closed surface sampled on a chart grid:
// first/second fundamental forms, curvatures, Christoffel symbols.  Built
// spectrally from the position field alone, so the same code serves graph
// surfaces X + h*nu and arbitrary smooth deformations of them (needed by
// the finite-difference oracles, which move nodes along the current normal).
struct GeometryState {
  GridPtr grid;
  Field h;  // height over the reference; empty for position-built states

  Vec3Field P, Pu, Pv, nrm;
  Field g_uu, g_uv, g_vv;
  Field gi_uu, gi_uv, gi_vv;
  Field sqrtg;
  Field k_uu, k_uv, k_vv;           // <d2P, nrm>
  Field km_uu, km_uv, km_vu, km_vv; // k^a_b  (first index raised)
  Field kup_uu, kup_uv, kup_vv;     // k^{ab}
  Field H;  // g^{ab} k_ab, sum of principal curvatures (unit sphere: -2)
  Field K;  // det k / det g
  Field G_uuu, G_uuv, G_uvv;        // Gamma^u_{uu}, Gamma^u_{uv}, Gamma^u_{vv}
  Field G_vuu, G_vuv, G_vvv;
  Field tilt;                       // <reference normal, nrm>

  double area() const;
  double volume() const;
};

inline void check_same_grid(const GeometryState& s, const Field& f) {
  if (f.rows() != s.grid->nu || f.cols() != s.grid->nv)
    throw DomainError("field/grid mismatch: field is " +
                      std::to_string(f.rows()) + "x" + std::to_string(f.cols()) +
                      ", grid is " + std::to_string(s.grid->nu) + "x" +
                      std::to_string(s.grid->nv));
}

// Chart integral against the realized area element.
inline double integrate(const GeometryState& s, const Field& f) {
  check_same_grid(s, f);
  return s.grid->integrate_chart(f * s.sqrtg);
}

inline double l2_norm(const GeometryState& s, const Field& f) {
  return std::sqrt(integrate(s, f * f));
}

inline GeometryState geometry_from_positions(const GridPtr& gp, const Vec3Field& P,
                                             const Vec3Field& orient_hint) {
  GeometryState s;
  s.grid = gp;
  const Grid& grid = *gp;
  s.P = P;
  for (int c = 0; c < 3; ++c) {
    s.Pu[c] = grid.d_u(P[c], Parity::Even);
    s.Pv[c] = grid.d_v(P[c]);
  }
  s.g_uu = dot(s.Pu, s.Pu);
  s.g_uv = dot(s.Pu, s.Pv);
  s.g_vv = dot(s.Pv, s.Pv);
  Field det = s.g_uu * s.g_vv - s.g_uv * s.g_uv;
  double dmin = det.minCoeff();
  if (!(dmin > 0.0)) {
    int i, j;
    det.minCoeff(&i, &j);
    throw DomainError("degenerate surface metric: det g = " +
                      std::to_string(dmin) + " at node (" + std::to_string(i) +
                      "," + std::to_string(j) + ")");
  }
  s.sqrtg = det.sqrt();
  s.gi_uu = s.g_vv / det;
  s.gi_uv = -s.g_uv / det;
  s.gi_vv = s.g_uu / det;

  Vec3Field cr = cross(s.Pu, s.Pv);
  Field crn = dot(cr, cr).sqrt();
  for (int c = 0; c < 3; ++c) s.nrm[c] = cr[c] / crn;
  Field orient = dot(s.nrm, orient_hint);
  if (!(orient.minCoeff() > 0.0))
    throw DomainError("surface orientation flipped against the outward hint");

  // Second fundamental form from second position derivatives.
  Vec3Field Puu, Puv, Pvv;
  for (int c = 0; c < 3; ++c) {
    Puu[c] = grid.d_uu(P[c], Parity::Even);
    Puv[c] = grid.d_v(s.Pu[c]);
    Pvv[c] = grid.d_vv(P[c]);
  }
  s.k_uu = dot(Puu, s.nrm);
  s.k_uv = dot(Puv, s.nrm);
  s.k_vv = dot(Pvv, s.nrm);

  s.km_uu = s.gi_uu * s.k_uu + s.gi_uv * s.k_uv;
  s.km_uv = s.gi_uu * s.k_uv + s.gi_uv * s.k_vv;
  s.km_vu = s.gi_uv * s.k_uu + s.gi_vv * s.k_uv;
  s.km_vv = s.gi_uv * s.k_uv + s.gi_vv * s.k_vv;
  s.kup_uu = s.gi_uu * s.km_uu + s.gi_uv * s.km_uv;
  s.kup_uv = s.gi_uv * s.km_uu + s.gi_vv * s.km_uv;
  s.kup_vv = s.gi_uv * s.km_vu + s.gi_vv * s.km_vv;

  s.H = s.km_uu + s.km_vv;
  s.K = (s.k_uu * s.k_vv - s.k_uv * s.k_uv) / det;

  // Christoffel symbols via lowered symbols of the metric derivatives.
  Field dguu_u = grid.d_u(s.g_uu, Parity::Even);
  Field dguu_v = grid.d_v(s.g_uu);
  Field dguv_u = grid.d_u(s.g_uv, Parity::Odd);
  Field dguv_v = grid.d_v(s.g_uv);
  Field dgvv_u = grid.d_u(s.g_vv, Parity::Even);
  Field dgvv_v = grid.d_v(s.g_vv);

  Field L_u_uu = 0.5 * dguu_u;
  Field L_v_uu = dguv_u - 0.5 * dguu_v;
  Field L_u_uv = 0.5 * dguu_v;
  Field L_v_uv = 0.5 * dgvv_u;
  Field L_u_vv = dguv_v - 0.5 * dgvv_u;
  Field L_v_vv = 0.5 * dgvv_v;

  s.G_uuu = s.gi_uu * L_u_uu + s.gi_uv * L_v_uu;
  s.G_uuv = s.gi_uu * L_u_uv + s.gi_uv * L_v_uv;
  s.G_uvv = s.gi_uu * L_u_vv + s.gi_uv * L_v_vv;
  s.G_vuu = s.gi_uv * L_u_uu + s.gi_vv * L_v_uu;
  s.G_vuv = s.gi_uv * L_u_uv + s.gi_vv * L_v_uv;
  s.G_vvv = s.gi_uv * L_u_vv + s.gi_vv * L_v_vv;

  s.tilt = dot(grid.N, s.nrm);
  return s;
}

inline GeometryState geometry_from_positions(const GridPtr& gp,
                                             const Vec3Field& P) {
  return geometry_from_positions(gp, P, gp->N);
}

// Geometry of the graph surface X + h * nu over the reference.  Height
// fields must stay below half the normal injectivity radius.
inline GeometryState pullback_geometry(const GridPtr& gp, const Field& h) {
  const Grid& grid = *gp;
  grid.check_height(h);
  Vec3Field P;
  for (int c = 0; c < 3; ++c) P[c] = grid.X[c] + h * grid.N[c];
  GeometryState s = geometry_from_positions(gp, P, grid.N);
  s.h = h;
  return s;
}

inline double GeometryState::area() const {
  return integrate(*this, Field::Ones(grid->nu, grid->nv));
}

// (1/3) int <P, nrm> dA by the divergence theorem (outward normal).
inline double GeometryState::volume() const {
  return integrate(*this, dot(P, nrm)) / 3.0;
}

// ---- covariant calculus -------------------------------------------------

struct CovHess {
  Field uu, uv, vv;  // f_{;ab} = f_{,ab} - Gamma^c_{ab} f_{,c}
};

inline CovHess covariant_hessian(const GeometryState& s, const Field& f,
                                 Parity par) {
  check_same_grid(s, f);
  const Grid& g = *s.grid;
  Field fu = g.d_u(f, par);
  Field fv = g.d_v(f);
  CovHess h;
  h.uu = g.d_uu(f, par) - s.G_uuu * fu - s.G_vuu * fv;
  h.uv = g.d_v(fu) - s.G_uuv * fu - s.G_vuv * fv;
  h.vv = g.d_vv(f) - s.G_uvv * fu - s.G_vvv * fv;
  return h;
}

// Delta_g f = g^{ab} (f_{,ab} - Gamma^c_{ab} f_{,c})
inline Field laplace_beltrami(const GeometryState& s, const Field& f,
                              Parity par = Parity::Even) {
  CovHess h = covariant_hessian(s, f, par);
  return s.gi_uu * h.uu + 2.0 * s.gi_uv * h.uv + s.gi_vv * h.vv;
}

inline Field laplace2(const GeometryState& s, const Field& f,
                      Parity par = Parity::Even) {
  return laplace_beltrami(s, laplace_beltrami(s, f, par), par);
}

// <grad f, grad q>_g
inline Field grad_inner(const GeometryState& s, const Field& f, Parity pf,
                        const Field& q, Parity pq) {
  const Grid& g = *s.grid;
  Field fu = g.d_u(f, pf), fv = g.d_v(f);
  Field qu = g.d_u(q, pq), qv = g.d_v(q);
  return s.gi_uu * fu * qu + s.gi_uv * (fu * qv + fv * qu) + s.gi_vv * fv * qv;
}

// (1/sqrt g) d_a (sqrt g V^a) for a geometric vector field V; par_Vu is the
// glide parity of the V^u component (V^v then carries the opposite one).
inline Field divergence(const GeometryState& s, const Field& Vu,
                        const Field& Vv, Parity par_Vu) {
  const Grid& g = *s.grid;
  Field su = s.sqrtg * Vu;  // sqrt g is glide-odd
  Field sv = s.sqrtg * Vv;
  return (g.d_u(su, flip(par_Vu)) + g.d_v(sv)) / s.sqrtg;
}

}  // namespace helflow
