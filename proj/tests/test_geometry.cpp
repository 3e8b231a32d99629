#include <catch2/catch_amalgamated.hpp>

#include "helflow/energy.hpp"
#include "helflow/harmonics.hpp"
#include "helflow/oracles.hpp"

using namespace helflow;

namespace {
double maxdiff(const Field& a, const Field& b) { return (a - b).abs().maxCoeff(); }
}  // namespace

TEST_CASE("pullback at h = 0 is the reference geometry") {
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 20, 16);
    GeometryState s = pullback_geometry(g, Field::Zero(20, 16));
    CHECK(maxdiff(s.H, g->H) < 1e-10);
    CHECK(maxdiff(s.K, g->K) < 1e-10);
    CHECK(maxdiff(s.g_uv, g->g_uv) < 1e-11);
    for (int c = 0; c < 3; ++c) CHECK(maxdiff(s.P[c], g->X[c]) == 0.0);
  }
}

TEST_CASE("constant offsets: sphere h=0.5 and torus h=0.1 are round offsets") {
  GridPtr g = make_grid(make_sphere(1.0), 20, 16);
  GeometryState s = pullback_geometry(g, Field::Constant(20, 16, 0.45));
  CHECK_THAT(s.area(), Catch::Matchers::WithinRel(4.0 * kPi * 1.45 * 1.45, 1e-12));
  CHECK(maxdiff(s.H, Field::Constant(20, 16, -2.0 / 1.45)) < 1e-10);
  CHECK(maxdiff(s.K, Field::Constant(20, 16, 1.0 / (1.45 * 1.45))) < 1e-10);

  // half-reach admissibility wall
  CHECK_THROWS_AS(pullback_geometry(g, Field::Constant(20, 16, 0.6)), DomainError);

  const double a = 2.0, r = 0.5, c = 0.1;
  GridPtr t = make_grid(make_torus(a, r), 20, 20);
  GeometryState st = pullback_geometry(t, Field::Constant(20, 20, c));
  Field Hex(20, 20), Kex(20, 20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      const double A = a + (r + c) * std::cos(t->v(j));
      Hex(i, j) = -std::cos(t->v(j)) / A - 1.0 / (r + c);
      Kex(i, j) = std::cos(t->v(j)) / ((r + c) * A);
    }
  CHECK(maxdiff(st.H, Hex) < 1e-10);
  CHECK(maxdiff(st.K, Kex) < 1e-10);
  CHECK_THAT(st.area(), Catch::Matchers::WithinRel(torus_area(a, r + c), 1e-12));
  CHECK_THAT(st.volume(), Catch::Matchers::WithinRel(torus_volume(a, r + c), 1e-12));
}

TEST_CASE("graph identities: metric split, tangent formula, quotient normal, tilt") {
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 32, 32);
    Field h = random_smooth_field(*g, 77, 0.15 * g->reach());
    GeometryState s = pullback_geometry(g, h);
    const int nu = g->nu, nv = g->nv;

    // reference mixed curvature k^a_b and derivatives of h
    Field det = g->g_uu * g->g_vv - g->g_uv * g->g_uv;
    Field gi_uu = g->g_vv / det, gi_uv = -g->g_uv / det, gi_vv = g->g_uu / det;
    Field km_uu = gi_uu * g->k_uu + gi_uv * g->k_uv;
    Field km_uv = gi_uu * g->k_uv + gi_uv * g->k_vv;
    Field km_vu = gi_uv * g->k_uu + gi_vv * g->k_uv;
    Field km_vv = gi_uv * g->k_uv + gi_vv * g->k_vv;
    Field hu = g->d_u(h, Parity::Even), hv = g->d_v(h);

    // tangents tau_a = (delta - h k)^b_a d_b X + h_,a nu
    Vec3Field tau_u, tau_v, Xu, Xv;
    for (int c = 0; c < 3; ++c) {
      Xu[c] = g->d_u(g->X[c], Parity::Even);
      Xv[c] = g->d_v(g->X[c]);
      tau_u[c] = Xu[c] - h * (km_uu * Xu[c] + km_vu * Xv[c]) + hu * g->N[c];
      tau_v[c] = Xv[c] - h * (km_uv * Xu[c] + km_vv * Xv[c]) + hv * g->N[c];
    }
    for (int c = 0; c < 3; ++c) {
      CHECK(maxdiff(s.Pu[c], tau_u[c]) < 1e-9);
      CHECK(maxdiff(s.Pv[c], tau_v[c]) < 1e-9);
    }

    // gbar_ab = g_ab - 2 h k_ab + h^2 (k k)_ab and g(h) = gbar + dh x dh
    Field kk_uu = g->k_uu * km_uu + g->k_uv * km_vu;
    Field kk_uv = g->k_uu * km_uv + g->k_uv * km_vv;
    Field kk_vv = g->k_uv * km_uv + g->k_vv * km_vv;
    Field gb_uu = g->g_uu - 2.0 * h * g->k_uu + h * h * kk_uu;
    Field gb_uv = g->g_uv - 2.0 * h * g->k_uv + h * h * kk_uv;
    Field gb_vv = g->g_vv - 2.0 * h * g->k_vv + h * h * kk_vv;
    CHECK(maxdiff(s.g_uu, gb_uu + hu * hu) < 1e-9);
    CHECK(maxdiff(s.g_uv, gb_uv + hu * hv) < 1e-9);
    CHECK(maxdiff(s.g_vv, gb_vv + hv * hv) < 1e-9);

    // quotient formula for nu_h, with the gbar metric in both the tangential
    // correction and the normalization; ground truth is the cross product.
    Field gbdet = gb_uu * gb_vv - gb_uv * gb_uv;
    Field gbi_uu = gb_vv / gbdet, gbi_uv = -gb_uv / gbdet, gbi_vv = gb_uu / gbdet;
    Field cu = gbi_uu * hu + gbi_uv * hv;  // (grad_gbar h)^u
    Field cv = gbi_uv * hu + gbi_vv * hv;
    Field den = (1.0 + cu * hu + cv * hv).sqrt();
    // the tangential correction runs along sigma_a = tau_a - h_,a nu, the
    // parallel-surface tangents whose Gram matrix is gbar; only then is the
    // quotient orthogonal to the graph tangents.
    for (int c = 0; c < 3; ++c) {
      Field num = g->N[c] - cu * (tau_u[c] - hu * g->N[c]) -
                  cv * (tau_v[c] - hv * g->N[c]);
      CHECK(maxdiff(num / den, s.nrm[c]) < 1e-9);
    }
    CHECK(maxdiff(s.tilt, 1.0 / den) < 1e-9);
  }
}

TEST_CASE("vector Laplace identity Delta_g phi = H nu and int H nu dA = 0") {
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 32, 32);
    Field h = random_smooth_field(*g, 13, 0.12 * g->reach());
    GeometryState s = pullback_geometry(g, h);
    const double scale = s.H.abs().maxCoeff();
    for (int c = 0; c < 3; ++c) {
      Field lap = laplace_beltrami(s, s.P[c], Parity::Even);
      CHECK(maxdiff(lap, s.H * s.nrm[c]) / scale < 1e-8);
      CHECK(std::abs(integrate(s, s.H * s.nrm[c])) < 1e-9 * scale * s.area());
    }
  }
}

TEST_CASE("laplace_beltrami: eigenfunctions and independent stencil oracle") {
  GridPtr g = make_grid(make_sphere(1.0), 24, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(24, 16));
  Field ct(24, 16);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 16; ++j) ct(i, j) = std::cos(g->u(i));
  CHECK(maxdiff(laplace_beltrami(s, ct, Parity::Even), -2.0 * ct) < 1e-11);
  CHECK(laplace_beltrami(s, Field::Ones(24, 16), Parity::Even).abs().maxCoeff() <
        1e-11);

  // torus a=2 r=0.5, f = sin(2u): coordinate-formula oracle with all
  // derivatives (metric and f) taken by small-step central differences of
  // the analytic expressions -- fully independent of the spectral machinery.
  const double a = 2.0, r = 0.5;
  GridPtr t = make_grid(make_torus(a, r), 24, 24);
  GeometryState st = pullback_geometry(t, Field::Zero(24, 24));
  Field f = torus_mode_field(*t, 2, 0, true);
  Field lap = laplace_beltrami(st, f, Parity::Even);

  auto guu = [&](double, double v) { double A = a + r * std::cos(v); return A * A; };
  auto gvv = [&](double, double) { return r * r; };
  auto fn = [&](double u, double) { return std::sin(2 * u); };
  const double d = 2e-4;
  for (int i = 0; i < t->nu; i += 5)
    for (int j = 0; j < t->nv; j += 5) {
      const double u = t->u(i), v = t->v(j);
      auto d1 = [&](auto fun, int argu) {
        return argu ? (fun(u + d, v) - fun(u - d, v)) / (2 * d)
                    : (fun(u, v + d) - fun(u, v - d)) / (2 * d);
      };
      auto d2 = [&](auto fun, int argu) {
        return argu ? (fun(u + d, v) - 2 * fun(u, v) + fun(u - d, v)) / (d * d)
                    : (fun(u, v + d) - 2 * fun(u, v) + fun(u, v - d)) / (d * d);
      };
      // diagonal metric: Gamma^u_uu = guu_u/(2guu), Gamma^u_vv = -gvv_u/(2guu),
      // Gamma^v_uu = -guu_v/(2gvv), Gamma^v_vv = gvv_v/(2gvv),
      // Gamma^u_uv = guu_v/(2guu), Gamma^v_uv = gvv_u/(2gvv)
      const double Guuu = d1(guu, 1) / (2 * guu(u, v));
      const double Guvv = -d1(gvv, 1) / (2 * guu(u, v));
      const double Gvuu = -d1(guu, 0) / (2 * gvv(u, v));
      const double fu = d1(fn, 1), fuu = d2(fn, 1), fvv = d2(fn, 0);
      const double oracle = (fuu - Guuu * fu) / guu(u, v) +
                            (fvv - Guvv * fu) / gvv(u, v);
      (void)Gvuu;
      INFO("node " << i << "," << j);
      CHECK(std::abs(lap(i, j) - oracle) < 1e-6);
    }
}

TEST_CASE("convention-pinning identity: d/de area(h + e w / tilt) = -int w H dA") {
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 32, 32);
    Field h = random_smooth_field(*g, 5, 0.1 * g->reach());
    Field w = random_smooth_field(*g, 6, 0.05 * g->reach());
    GeometryState s = pullback_geometry(g, h);
    const double exact = -integrate(s, w * s.H);
    Field wt = w / s.tilt;
    auto fdval = [&](double e) {
      return (pullback_geometry(g, h + e * wt).area() -
              pullback_geometry(g, h - e * wt).area()) /
             (2 * e);
    };
    FdSweep sw = fd_sweep(fdval, exact, std::max(std::abs(exact), 1e-3));
    INFO(to_string(ref.kind));
    CHECK(sw.best_err < 1e-7);
    CHECK(sw.observed_order > 1.9);
  }
}

TEST_CASE("Gauss-Bonnet on random admissible graphs") {
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 64, 64);
    const double expected = ref.kind == SurfaceKind::Sphere ? 4.0 * kPi : 0.0;
    for (std::uint64_t seed : {11u, 29u, 43u, 57u, 101u, 222u}) {
      Field h = random_smooth_field(*g, seed, 0.2 * g->reach());
      GeometryState s = pullback_geometry(g, h);
      INFO(to_string(ref.kind) << " seed " << seed);
      CHECK(std::abs(integrate(s, s.K) - expected) < 1e-7);
    }
  }
}

TEST_CASE("area and volume of a perturbed sphere vs 4x-resolution quadrature") {
  // h = 0.05 cos(theta): evaluate analytically on both grids
  auto build = [](int nu, int nv) {
    GridPtr g = make_grid(make_sphere(1.0), nu, nv);
    Field h(nu, nv);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nv; ++j) h(i, j) = 0.05 * std::cos(g->u(i));
    return pullback_geometry(g, h);
  };
  GeometryState coarse = build(24, 16);
  GeometryState fine = build(96, 64);
  CHECK_THAT(coarse.area(), Catch::Matchers::WithinRel(fine.area(), 1e-8));
  CHECK_THAT(coarse.volume(), Catch::Matchers::WithinRel(fine.volume(), 1e-8));
}

TEST_CASE("refinement: integrals of a non-bandlimited graph converge spectrally") {
  auto area_at = [](int n) {
    GridPtr g = make_grid(make_sphere(1.0), n, n);
    Field h(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        h(i, j) = 0.1 * std::exp(std::cos(g->u(i))) *
                  (1.0 + 0.3 * std::sin(g->u(i)) * std::cos(g->v(j)));
    return pullback_geometry(g, h).area();
  };
  const double ref = area_at(96);
  const double e16 = std::abs(area_at(16) - ref);
  const double e32 = std::abs(area_at(32) - ref);
  CHECK(e32 < std::max(e16 / 50.0, 1e-12));
}

TEST_CASE("grid mismatch is rejected") {
  GridPtr g = make_grid(make_sphere(1.0), 16, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(16, 16));
  CHECK_THROWS_AS(integrate(s, Field::Zero(8, 16)), DomainError);
  CHECK_THROWS_AS(laplace_beltrami(s, Field::Zero(16, 8), Parity::Even), DomainError);
}
