#include <catch2/catch_amalgamated.hpp>

#include "helflow/constraints.hpp"
#include "helflow/harmonics.hpp"
#include "helflow/oracles.hpp"

using namespace helflow;

// Independent 1-D quadrature of the torus bending integrand (dense periodic
// trapezoid; spectrally exact for the analytic integrand).
static double torus_energy_1d(double a, double r, double kappa, double c0,
                              int n = 4096) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    const double v = 2.0 * kPi * j / n;
    const double A = a + r * std::cos(v);
    const double H = -std::cos(v) / A - 1.0 / r;
    acc += (H - c0) * (H - c0) * A * r;
  }
  return 0.5 * kappa * 2.0 * kPi * acc * (2.0 * kPi / n);
}

TEST_CASE("energy closed forms: sphere 8pi, zero at matched c0, torus 4pi^2") {
  GridPtr g = make_grid(make_sphere(1.0), 24, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(24, 16));
  CHECK_THAT(energy(s, {1.0, 0.0}), Catch::Matchers::WithinRel(8.0 * kPi, 1e-12));
  CHECK(std::abs(energy(s, {1.0, -2.0})) < 1e-12);

  GridPtr t = make_grid(make_torus(std::sqrt(2.0), 1.0), 32, 32);
  GeometryState st = pullback_geometry(t, Field::Zero(32, 32));
  CHECK_THAT(energy(st, {1.0, 0.0}),
             Catch::Matchers::WithinRel(4.0 * kPi * kPi, 1e-10));
  CHECK_THAT(energy(st, {1.0, 0.0}),
             Catch::Matchers::WithinRel(torus_energy_1d(std::sqrt(2.0), 1.0, 1.0, 0.0),
                                        1e-10));
  CHECK_THAT(torus_energy_1d(std::sqrt(2.0), 1.0, 1.0, 0.0),
             Catch::Matchers::WithinRel(torus_energy_c00(std::sqrt(2.0), 1.0, 1.0),
                                        1e-12));
  // c0 != 0 cross-check of the 2-D quadrature against the 1-D oracle
  CHECK_THAT(energy(st, {2.0, 0.7}),
             Catch::Matchers::WithinRel(torus_energy_1d(std::sqrt(2.0), 1.0, 2.0, 0.7),
                                        1e-10));
}

TEST_CASE("scale invariance at c0 = 0 and translation invariance") {
  const Physics p{1.3, 0.0};
  GridPtr g1 = make_grid(make_sphere(1.0), 16, 16);
  GridPtr g2 = make_grid(make_sphere(2.5), 16, 16);
  CHECK_THAT(energy(pullback_geometry(g1, Field::Zero(16, 16)), p),
             Catch::Matchers::WithinRel(
                 energy(pullback_geometry(g2, Field::Zero(16, 16)), p), 1e-12));
  GridPtr t1 = make_grid(make_torus(2.0, 0.5), 16, 16);
  GridPtr t2 = make_grid(make_torus(6.0, 1.5), 16, 16);
  CHECK_THAT(energy(pullback_geometry(t1, Field::Zero(16, 16)), p),
             Catch::Matchers::WithinRel(
                 energy(pullback_geometry(t2, Field::Zero(16, 16)), p), 1e-12));

  // rigid translation of all positions: same energy, same gradient field
  GridPtr g = make_grid(make_torus(2.0, 0.5), 24, 24);
  Field h = random_smooth_field(*g, 3, 0.1);
  GeometryState s = pullback_geometry(g, h);
  Vec3Field Pt = s.P;
  Pt[0] += 0.37;
  Pt[1] -= 1.2;
  Pt[2] += 0.05;
  GeometryState stx = geometry_from_positions(g, Pt, s.nrm);
  CHECK_THAT(energy(stx, p), Catch::Matchers::WithinRel(energy(s, p), 1e-12));
  CHECK((l2_gradient(stx, p) - l2_gradient(s, p)).abs().maxCoeff() < 1e-9);
}

TEST_CASE("gradient is zero on Willmore-critical spheres, constant for c0 != 0") {
  GridPtr g = make_grid(make_sphere(1.0), 24, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(24, 16));
  CHECK(l2_gradient(s, {1.0, 0.0}).abs().maxCoeff() < 1e-9);

  // radius R, c0 != 0: constant gradient kappa c0 (2K - H c0/2), and its
  // value matches d/dR of the closed-form energy F(R) = 2 pi kappa (2+c0 R)^2
  // through dF = int grad * w dA with w = 1.
  const double R = 1.7, kappa = 2.2, c0 = 0.6;
  GridPtr gR = make_grid(make_sphere(R), 24, 16);
  GeometryState sR = pullback_geometry(gR, Field::Zero(24, 16));
  Field grad = l2_gradient(sR, {kappa, c0});
  const double expect = kappa * c0 * (2.0 / (R * R) + c0 / R);
  CHECK((grad - expect).abs().maxCoeff() < 1e-9);
  const double dFdR = 4.0 * kPi * kappa * c0 * (2.0 + c0 * R);
  CHECK_THAT(expect * sphere_area(R), Catch::Matchers::WithinRel(dFdR, 1e-12));
}

TEST_CASE("chart differential matches central differences of the energy") {
  const Physics p{1.0, 0.4};
  for (auto ref : {make_sphere(1.0), make_torus(2.0, 0.5)}) {
    GridPtr g = make_grid(ref, 32, 32);
    Field h = random_smooth_field(*g, 17, 0.1 * g->reach());
    GeometryState s = pullback_geometry(g, h);
    for (std::uint64_t seed : {21u, 22u, 23u}) {
      Field wt = random_smooth_field(*g, seed, 0.05 * g->reach());
      const double exact = energy_differential(s, p, wt);
      auto fd = [&](double e) {
        return (energy(pullback_geometry(g, h + e * wt), p) -
                energy(pullback_geometry(g, h - e * wt), p)) /
               (2 * e);
      };
      FdSweep sw = fd_sweep(fd, exact, std::max(std::abs(exact), 1e-6));
      INFO(to_string(ref.kind) << " seed " << seed);
      CHECK(sw.best_err < 1e-5);
      CHECK(sw.observed_order > 1.9);
    }
  }
}

TEST_CASE("area_volume examples") {
  GridPtr g = make_grid(make_sphere(1.0), 16, 16);
  AreaVolume av = area_volume(pullback_geometry(g, Field::Zero(16, 16)));
  CHECK_THAT(av.area, Catch::Matchers::WithinRel(4.0 * kPi, 1e-12));
  CHECK_THAT(av.volume, Catch::Matchers::WithinRel(4.0 * kPi / 3.0, 1e-12));
  AreaVolume av2 = area_volume(pullback_geometry(g, Field::Constant(16, 16, 0.2)));
  CHECK_THAT(av2.area, Catch::Matchers::WithinRel(4.0 * kPi * 1.44, 1e-12));
  CHECK_THAT(av2.volume, Catch::Matchers::WithinRel(4.0 * kPi * 1.728 / 3.0, 1e-12));
  GridPtr t = make_grid(make_torus(2.0, 0.5), 16, 16);
  AreaVolume avt = area_volume(pullback_geometry(t, Field::Zero(16, 16)));
  CHECK_THAT(avt.area, Catch::Matchers::WithinRel(4.0 * kPi * kPi, 1e-12));
  CHECK_THAT(avt.volume, Catch::Matchers::WithinRel(kPi * kPi, 1e-12));
}

TEST_CASE("constraint differentials: examples and convected finite differences") {
  GridPtr g = make_grid(make_sphere(1.0), 24, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(24, 16));
  Field one = Field::Ones(24, 16);
  CHECK_THAT(volume_differential(s, one), Catch::Matchers::WithinRel(4.0 * kPi, 1e-12));
  CHECK_THAT(area_differential(s, one), Catch::Matchers::WithinRel(8.0 * kPi, 1e-12));
  Field ct(24, 16);
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 16; ++j) ct(i, j) = std::cos(g->u(i));
  CHECK(std::abs(volume_differential(s, ct)) < 1e-12);
  CHECK(std::abs(area_differential(s, ct)) < 1e-12);

  GridPtr t = make_grid(make_torus(2.0, 0.5), 32, 32);
  Field h = random_smooth_field(*t, 31, 0.08);
  GeometryState st = pullback_geometry(t, h);
  Field w = random_smooth_field(*t, 32, 0.05);
  const double dA = area_differential(st, w);
  const double dV = volume_differential(st, w);
  auto fdA = [&](double e) {
    return (convected_geometry(st, w, e).area() -
            convected_geometry(st, w, -e).area()) / (2 * e);
  };
  auto fdV = [&](double e) {
    return (convected_geometry(st, w, e).volume() -
            convected_geometry(st, w, -e).volume()) / (2 * e);
  };
  FdSweep swa = fd_sweep(fdA, dA, std::max(std::abs(dA), 1e-6));
  FdSweep swv = fd_sweep(fdV, dV, std::max(std::abs(dV), 1e-6));
  CHECK(swa.best_err < 1e-6);
  CHECK(swv.best_err < 1e-6);
  CHECK(swa.observed_order > 1.9);
  CHECK(swv.observed_order > 1.9);
}

TEST_CASE("multiplier fit: round sphere exact, residual equals projected gradient") {
  GridPtr g = make_grid(make_sphere(1.0), 24, 16);
  GeometryState s = pullback_geometry(g, Field::Zero(24, 16));
  for (double c0 : {0.0, 0.8, -1.5}) {
    MultiplierFit fit = fit_multipliers(s, {1.0, c0});
    INFO("c0 = " << c0);
    CHECK(fit.residual_norm <= 1e-10);
  }

  // residual field coincides with the tangential projection of the gradient
  GridPtr t = make_grid(make_torus(2.0, 0.5), 32, 32);
  GeometryState st = pullback_geometry(t, random_smooth_field(*t, 5, 0.08));
  const Physics p{1.0, 0.3};
  MultiplierFit fit = fit_multipliers(st, p);
  Field proj = project_tangent(st, l2_gradient(st, p));
  const double scale = field_scale(proj);
  CHECK((fit.residual - proj).abs().maxCoeff() / scale < 1e-11);
  CHECK(fit.residual_norm == l2_norm(st, fit.residual));
}

TEST_CASE("Clifford-ratio torus is Helfrich-stationary: regression residual") {
  GridPtr t = make_grid(make_torus(std::sqrt(2.0), 1.0), 64, 64);
  GeometryState s = pullback_geometry(t, Field::Zero(64, 64));
  const Physics p{1.0, 0.0};
  // gradient vanishes pointwise at the sqrt(2)-ratio torus
  CHECK(l2_gradient(s, p).abs().maxCoeff() < 1e-8);
  MultiplierFit fit = fit_multipliers(s, p);
  // regression number recorded from the first validated run at 64x64
  // (measured 1.134e-9; bound leaves ~30% headroom)
  CHECK(fit.residual_norm < 1.5e-9);
}
