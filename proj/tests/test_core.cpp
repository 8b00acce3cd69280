#include <doctest.h>

#include <random>

#include "amlab/core.hpp"

using namespace amlab;

TEST_CASE("wrap reduces into the unit cell") {
  CHECK(wrap(Vec2(2.25, -0.5)).x.isApprox(Vec2(0.25, 0.5)));
  CHECK(wrap(Vec2(0.0, 0.999)).x == Vec2(0.0, 0.999));
  CHECK(wrap(Vec2(1.0, 1.0)).x == Vec2(0.0, 0.0));
  CHECK(wrap(Vec2(-1e-18, 0.0)).x(0) < 1.0);
  CHECK_THROWS_AS(wrap(Vec2(std::nan(""), 0.0)), Error);
}

TEST_CASE("wrap is idempotent and invariant under integer translation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_int_distribution<int> k(-20, 20);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 p(u(rng), u(rng));
    const TorusPoint w = wrap(p);
    CHECK(w.x(0) >= 0.0);
    CHECK(w.x(0) < 1.0);
    CHECK(w.x(1) >= 0.0);
    CHECK(w.x(1) < 1.0);
    CHECK(wrap(w.x).x == w.x);
    const Vec2 shifted = p + Vec2(k(rng), k(rng));
    CHECK((wrap(shifted).x - w.x).norm() < 1e-12);
  }
}

TEST_CASE("wrap on the doubled cell") {
  const CellPeriods cover{2, 1};
  CHECK(wrap(Vec2(2.5, 1.25), cover).x.isApprox(Vec2(0.5, 0.25)));
  CHECK(wrap(Vec2(1.5, 0.0), cover).x.isApprox(Vec2(1.5, 0.0)));
}

TEST_CASE("continuous lift") {
  std::vector<TorusPoint> seam{{Vec2(0.9, 0.0)}, {Vec2(0.1, 0.0)}};
  auto lift = continuous_lift(seam, {Vec2(0.9, 0.0)});
  CHECK(lift[1].x.isApprox(Vec2(1.1, 0.0)));

  std::vector<TorusPoint> still(5, TorusPoint{Vec2(0.3, 0.4)});
  for (const auto& l : continuous_lift(still, {Vec2(3.3, -1.6)})) CHECK(l.x.isApprox(Vec2(3.3, -1.6)));

  // samples of the flat geodesic with v = (1,0), dt = 0.1
  std::vector<TorusPoint> geo;
  const Vec2 x0(0.37, 0.21);
  for (int i = 0; i <= 10; ++i) geo.push_back(wrap(Vec2(x0 + 0.1 * i * Vec2(1.0, 0.0))));
  auto l = continuous_lift(geo, {x0});
  CHECK(l.back().x(0) == doctest::Approx(x0(0) + 1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < l.size(); ++i) CHECK((wrap(l[i].x).x - geo[i].x).norm() < 1e-12);

  std::vector<TorusPoint> jump{{Vec2(0.0, 0.0)}, {Vec2(0.5, 0.0)}};
  CHECK_THROWS_AS(continuous_lift(jump, {Vec2(0.0, 0.0)}), Error);
  try {
    continuous_lift(jump, {Vec2(0.0, 0.0)});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AmbiguousLift);
  }
}

TEST_CASE("loop traversal lifts to its class") {
  const auto loop = DiscreteLoop::straight(Vec2(0.2, 0.7), {2, -3}, 4.0, 40);
  std::vector<TorusPoint> pts;
  for (int i = 0; i <= loop.size(); ++i) pts.push_back(wrap(loop.node(i)));
  auto l = continuous_lift(pts, {loop.node(0)});
  const Vec2 d = l.back().x - l.front().x;
  CHECK(std::round(d(0)) == 2.0);
  CHECK(std::round(d(1)) == -3.0);
  CHECK(std::abs(d(0) - 2.0) < 1e-12);
}

TEST_CASE("discrete loop closure and validation") {
  const auto loop = DiscreteLoop::straight(Vec2(0.1, 0.1), {1, 2}, 1.0, 8);
  CHECK(loop.node(8) - loop.node(0) == Vec2(1.0, 2.0));
  CHECK(loop.node(-1).isApprox(loop.node(7) - Vec2(1.0, 2.0)));
  CHECK_THROWS_AS(DiscreteLoop(std::vector<Vec2>(7, Vec2::Zero()), 1.0, {}), Error);
  CHECK_THROWS_AS(DiscreteLoop(std::vector<Vec2>(8, Vec2::Zero()), 0.0, {}), Error);
  const auto r = loop.rotated(3);
  CHECK(r.node(0) == loop.node(3));
  CHECK(r.node(8) - r.node(0) == Vec2(1.0, 2.0));
}

TEST_CASE("resample loop") {
  const auto loop = DiscreteLoop::straight(Vec2(0.0, 0.5), {1, 0}, 1.0, 8);
  const auto r = resample_loop(loop, 16);
  CHECK(r.size() == 16);
  CHECK(r.homology() == IntClass{1, 0});
  CHECK(r.period() == 1.0);
  for (int i = 0; i < 16; ++i) CHECK((r.node(i) - Vec2(i / 16.0, 0.5)).norm() < 1e-14);
  CHECK(r.node(16) - r.node(0) == Vec2(1.0, 0.0));
  const auto same = resample_loop(loop, 8);
  for (int i = 0; i < 8; ++i) CHECK(same.node(i) == loop.node(i));
  CHECK_THROWS_AS(resample_loop(loop, 7), Error);
}

TEST_CASE("pairing and homology classes") {
  const CohomologyClass w{Vec2(0.5, -2.0)};
  CHECK(pairing(w, IntClass{3, 4}) == 0.5 * 3 - 2.0 * 4);
  const HomologyClass h{Vec2(3.0, -7.0)};
  CHECK(h.integral());
  CHECK(h.as_int() == IntClass{3, -7});
  CHECK_FALSE(HomologyClass{Vec2(0.5, 1.0)}.integral());
  const HomologyClass a{Vec2(0.3, 1.1)}, b{Vec2(-2.0, 0.7)};
  CHECK(pairing(w, HomologyClass{a.h + 2.0 * b.h}) == doctest::Approx(pairing(w, a) + 2.0 * pairing(w, b)));
}

TEST_CASE("loop distance") {
  const auto a = DiscreteLoop::straight(Vec2(0.2, 0.0), {0, 1}, 1.0, 16);
  const auto b = DiscreteLoop::straight(Vec2(0.25, 0.3), {0, 1}, 1.0, 16);
  CHECK(loop_distance(a, b) == doctest::Approx(0.05));
  const auto c = DiscreteLoop::straight(Vec2(1.2, 5.0), {0, 1}, 1.0, 16);
  CHECK(loop_distance(a, c) < 1e-12);
}
