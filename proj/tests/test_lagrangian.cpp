#include <doctest.h>

#include <random>

#include "amlab/lagrangian.hpp"
#include "fixtures.hpp"

using namespace amlab;
using fixtures::random_vec;

namespace {

TangentState ts(double x1, double x2, double v1, double v2) { return {{Vec2(x1, x2)}, Vec2(v1, v2)}; }

TonelliLagrangian cos_potential(double amp) { return TonelliLagrangian::mechanical(FourierSeries({{1, 0, amp, 0.0}})); }

TonelliLagrangian constant_metric(double g11, double g22) {
  LagrangianData d;
  d.family = Family::Magnetic;
  d.g11 = FourierSeries::constant(g11);
  d.g22 = FourierSeries::constant(g22);
  return TonelliLagrangian(d);
}

}  // namespace

TEST_CASE("evaluator examples") {
  const auto flat = TonelliLagrangian::flat();
  CHECK(eval_L(flat, ts(0.3, 0.1, 1, 1)) == doctest::Approx(1.0));
  CHECK(energy(flat, ts(0.3, 0.1, 1, 1)) == doctest::Approx(1.0));

  const auto mech = cos_potential(0.5);
  CHECK(eval_L(mech, ts(0, 0.7, 0, 0)) == doctest::Approx(-0.5));
  CHECK(energy(mech, ts(0, 0.7, 0, 0)) == doctest::Approx(0.5));

  const auto mag = TonelliLagrangian::magnetic(FourierSeries::constant(0.3), {});
  CHECK(eval_L(mag, ts(0.2, 0.2, 2, 0)) == doctest::Approx(2.6));
  CHECK(energy(mag, ts(0.2, 0.2, 2, 0)) == doctest::Approx(2.0));
  CHECK(legendre(mag, ts(0, 0, 1, 0)).p.isApprox(Vec2(1.3, 0.0)));
  CHECK(inverse_legendre(mag, {{Vec2::Zero()}, Vec2(1.3, 0.0)}).v.isApprox(Vec2(1.0, 0.0)));

  CHECK(legendre(flat, ts(0, 0, 1, 2)).p.isApprox(Vec2(1.0, 2.0)));
  CHECK(inverse_legendre(flat, {{Vec2::Zero()}, Vec2(1.0, 2.0)}).v.isApprox(Vec2(1.0, 2.0)));
  CHECK(legendre(constant_metric(2.0, 1.0), ts(0, 0, 1, 1)).p.isApprox(Vec2(2.0, 1.0)));

  CHECK(hamiltonian(flat, {{Vec2::Zero()}, Vec2(1.0, 1.0)}) == doctest::Approx(1.0));
  CHECK(hamiltonian(mech, {{Vec2(0.0, 0.3)}, Vec2::Zero()}) == doctest::Approx(0.5));
}

TEST_CASE("non-finite input is rejected") {
  const auto flat = TonelliLagrangian::flat();
  CHECK_THROWS_AS(eval_L(flat, ts(0, 0, std::nan(""), 0)), Error);
  CHECK_THROWS_AS(legendre(flat, ts(INFINITY, 0, 0, 0)), Error);
}

TEST_CASE("family constraints") {
  LagrangianData d;
  d.family = Family::Mechanical;
  d.quartic = FourierSeries::constant(1.0);
  CHECK_THROWS_AS(TonelliLagrangian{d}, Error);
  LagrangianData e;
  e.family = Family::Mechanical;
  e.potential = FourierSeries({{5, 0, 1.0, 0.0}});
  CHECK_THROWS_AS(TonelliLagrangian{e}, Error);
  e.max_harmonic = 5;
  CHECK_NOTHROW(TonelliLagrangian{e});
  CHECK(family_from_string("magnetic") == Family::Magnetic);
  CHECK_THROWS(family_from_string("riemannian"));
}

TEST_CASE("analytic derivatives match central differences") {
  for (const auto& L : {fixtures::rich_custom(), fixtures::magnetic_demo(), TonelliLagrangian::standard_mechanical(0.05)}) {
    std::mt19937_64 rng(11);
    const double h = 1e-5;
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
      const Vec2 x = random_vec(rng, 0.0, 1.0), v = random_vec(rng, -3.0, 3.0);
      const Jet j = L.jet(x, v);
      CHECK(j.L == doctest::Approx(L.value(x, v)).epsilon(1e-13));
      for (int a = 0; a < 2; ++a) {
        Vec2 e = Vec2::Zero();
        e(a) = h;
        const auto rel = [](double an, double fd) { return std::abs(an - fd) / std::max(1.0, std::abs(an)); };
        worst = std::max(worst, rel(j.Lx(a), (L.value(x + e, v) - L.value(x - e, v)) / (2 * h)));
        worst = std::max(worst, rel(j.Lv(a), (L.value(x, v + e) - L.value(x, v - e)) / (2 * h)));
        const Jet xp = L.jet(x + e, v), xm = L.jet(x - e, v), vp = L.jet(x, v + e), vm = L.jet(x, v - e);
        for (int b = 0; b < 2; ++b) {
          worst = std::max(worst, rel(j.Lvv(b, a), (vp.Lv(b) - vm.Lv(b)) / (2 * h)));
          worst = std::max(worst, rel(j.Lvx(b, a), (xp.Lv(b) - xm.Lv(b)) / (2 * h)));
          worst = std::max(worst, rel(j.Lxx(b, a), (xp.Lx(b) - xm.Lx(b)) / (2 * h)));
        }
      }
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("acceleration solves the Euler-Lagrange system") {
  const auto L = fixtures::rich_custom();
  std::mt19937_64 rng(5);
  for (int s = 0; s < 100; ++s) {
    const Vec2 x = random_vec(rng, 0.0, 1.0), v = random_vec(rng, -2.0, 2.0);
    const Jet j = L.jet(x, v);
    const Vec2 a = L.acceleration(x, v);
    CHECK((j.Lvv * a - (j.Lx - j.Lvx * v)).norm() < 1e-12);
  }
  const auto mech = TonelliLagrangian::standard_mechanical(0.05);
  const Vec2 x(0.3, 0.8);
  const auto grad_u = mech.data().potential.jet(x).grad;
  CHECK((mech.acceleration(x, Vec2(0.4, -1.0)) + grad_u).norm() < 1e-14);
  CHECK(TonelliLagrangian::flat().acceleration(x, Vec2(3, 4)).norm() == 0.0);
}

TEST_CASE("flow jacobian matches finite differences of the field") {
  const auto L = fixtures::rich_custom();
  const Vec2 x(0.31, 0.72), v(0.9, -0.4);
  const Mat4 J = L.flow_jacobian(x, v);
  const double h = 1e-6;
  for (int c = 0; c < 4; ++c) {
    Vec4 e = Vec4::Zero();
    e(c) = h;
    const Vec2 ap = L.acceleration(x + e.head<2>(), v + e.tail<2>());
    const Vec2 am = L.acceleration(x - e.head<2>(), v - e.tail<2>());
    const Vec2 fd = (ap - am) / (2 * h);
    CHECK(std::abs(J(2, c) - fd(0)) < 1e-7);
    CHECK(std::abs(J(3, c) - fd(1)) < 1e-7);
  }
  CHECK(J(0, 2) == 1.0);
  CHECK(J(1, 3) == 1.0);
}

TEST_CASE("duality identities on random states") {
  for (const auto& L : {fixtures::rich_custom(), fixtures::magnetic_demo(), TonelliLagrangian::standard_mechanical(0.05)}) {
    std::mt19937_64 rng(3);
    for (int s = 0; s < 300; ++s) {
      const TangentState st{{random_vec(rng, 0.0, 1.0)}, random_vec(rng, -4.0, 4.0)};
      const CotangentState c = legendre(L, st);
      const TangentState back = inverse_legendre(L, c);
      CHECK((back.v - st.v).norm() <= 1e-10);
      CHECK(std::abs(energy(L, st) - hamiltonian(L, c)) <= 1e-10);
      // Fenchel inequality with a random competitor
      const Vec2 w = random_vec(rng, -4.0, 4.0);
      const double gap = hamiltonian(L, c) + L.value(st.point.x, w) - c.p.dot(w);
      CHECK(gap >= -1e-12);
      const double at = hamiltonian(L, c) + L.value(st.point.x, st.v) - c.p.dot(st.v);
      CHECK(std::abs(at) <= 1e-9);
    }
  }
}

TEST_CASE("energy of the magnetic family does not see A") {
  const auto with = fixtures::magnetic_demo();
  const auto without = TonelliLagrangian::mechanical(with.data().potential);
  std::mt19937_64 rng(9);
  for (int s = 0; s < 500; ++s) {
    const TangentState st{{random_vec(rng, 0.0, 1.0)}, random_vec(rng, -5.0, 5.0)};
    CHECK(std::abs(energy(with, st) - energy(without, st)) <= 1e-12);
  }
}

TEST_CASE("constant shift") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  const auto Lk = L.shifted(0.3);
  CHECK(Lk.value(Vec2(0.1, 0.2), Vec2(1, 0)) == doctest::Approx(L.value(Vec2(0.1, 0.2), Vec2(1, 0)) - 0.3));
}

TEST_CASE("validate_tonelli") {
  const auto rep = validate_tonelli(TonelliLagrangian::flat());
  CHECK(rep.min_hessian_eigenvalue == doctest::Approx(1.0));
  CHECK(rep.superlinear);
  const auto mech = validate_tonelli(TonelliLagrangian::standard_mechanical(0.05));
  CHECK(mech.min_hessian_eigenvalue == doctest::Approx(1.0));
  CHECK_NOTHROW(validate_tonelli(fixtures::rich_custom()));

  LagrangianData d;
  d.family = Family::CustomFourier;
  d.g11 = FourierSeries::constant(1.0);
  d.g22 = FourierSeries::constant(-0.5);
  try {
    validate_tonelli(TonelliLagrangian(d));
    FAIL("expected not-tonelli");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotTonelli);
  }
  ValidationGrid small;
  small.base_points = 16;
  CHECK_THROWS_AS(validate_tonelli(TonelliLagrangian::flat(), small), Error);
}

TEST_CASE("inverse legendre reports non-convergence") {
  LagrangianData d;
  d.family = Family::CustomFourier;
  // zero metric: Lv = A is constant and never reaches p
  d.g11 = FourierSeries::constant(0.0);
  d.g22 = FourierSeries::constant(0.0);
  d.a1 = FourierSeries::constant(0.2);
  const TonelliLagrangian bad(d);
  CHECK_THROWS_AS(inverse_legendre(bad, {{Vec2::Zero()}, Vec2(1.0, 0.0)}), Error);
}
