#include <doctest.h>

#include <cmath>
#include <sstream>

#include "amlab/entropy.hpp"
#include "amlab/orbits.hpp"

using namespace amlab;

namespace {

ConnectionGraph graph_with(int nodes, std::vector<std::pair<int, int>> edges, double transit, double period) {
  ConnectionGraph g;
  g.nodes.resize(std::size_t(nodes));
  for (auto& n : g.nodes) n.period = period;
  for (auto [a, b] : edges) {
    GraphEdge e;
    e.from = a;
    e.to = b;
    e.transit = transit;
    g.edges.push_back(e);
  }
  return g;
}

}  // namespace

TEST_CASE("phase distance uses the seam-minimal difference") {
  const PhasePoint a{Vec2(0.95, 0.5), Vec2(1, 0)};
  const PhasePoint b{Vec2(3.05, 0.5), Vec2(1, 0.3)};
  CHECK(phase_distance(a, b) == doctest::Approx(std::sqrt(0.01 + 0.09)));
  CHECK(phase_distance(a, a) == 0.0);
}

TEST_CASE("level samples lie on the level") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  LevelSamplingOptions so;
  so.count = 500;
  const auto pts = sample_level(L, 0.5, so);
  REQUIRE(pts.size() == 500);
  for (const auto& p : pts) {
    CHECK(std::abs(energy(L, p.x, p.v) - 0.5) <= 1e-9);
    CHECK(p.x.minCoeff() >= 0.0);
    CHECK(p.x.maxCoeff() < 1.0);
  }
  CHECK_THROWS_AS(sample_level(L, -0.2, so), Error);
}

TEST_CASE("flat torus: covering entropy vanishes") {
  const auto L = TonelliLagrangian::flat();
  const auto late = covering_entropy(L, 0.5);
  CHECK(late.status == "ok");
  CHECK(late.estimate <= 0.05);
  CHECK(late.estimate >= -0.01);
  for (const auto& row : late.covering)
    for (std::size_t t = 1; t < row.counts.size(); ++t) CHECK(row.counts[t] >= row.counts[t - 1]);
  CoveringOptions early;
  early.t_grid = {5, 6, 7, 8, 9, 10};
  const auto e = covering_entropy(L, 0.5, early);
  CHECK(late.estimate <= e.estimate + 0.01);
  std::ostringstream os;
  write_covering_csv(os, late);
  CHECK(os.str().rfind("delta,T,count,slope,resolution_limited\n0.5,20,", 0) == 0);
}

TEST_CASE("flat torus: Lyapunov exponent vanishes") {
  const auto r = lyapunov_exponent(TonelliLagrangian::flat(), 0.5);
  CHECK(r.estimate >= 0.0);
  CHECK(r.estimate <= 0.01);
}

TEST_CASE("Lyapunov exponent on a hyperbolic orbit") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  RefineOptions ro;
  ro.energy = 0.5;
  const auto o = refine_orbit(L, DiscreteLoop::straight(Vec2::Zero(), {0, 1}, 1.0, 64), ro);
  REQUIRE(o.floquet.stability == Stability::Hyperbolic);
  const double mult = std::max(std::abs(o.floquet.lambda[0]), std::abs(o.floquet.lambda[1]));
  LyapunovOptions lo;
  lo.t_total = 10 * o.period;
  lo.renorm_dt = o.period / 4;
  lo.dt = 1e-3;
  const auto run = lyapunov_from(L, o.seed, Vec4(1.0, 0.3, -0.2, 0.5), lo);
  CHECK(run.valid);
  CHECK(run.exponent == doctest::Approx(std::log(mult) / o.period).epsilon(0.05));
}

TEST_CASE("time reversal leaves the exponent unchanged") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  LyapunovOptions fwd;
  LyapunovOptions bwd = fwd;
  bwd.direction = -1;
  const double a = lyapunov_exponent(L, 0.5, fwd).estimate;
  const double b = lyapunov_exponent(L, 0.5, bwd).estimate;
  CHECK(std::abs(a - b) <= 0.25 * std::max(a, b) + 2e-3);
}

TEST_CASE("horseshoe scale") {
  const auto loop = horseshoe_bound(graph_with(1, {{0, 0}}, 4.0, 1.0), 0.5);
  CHECK(loop.certificate);
  CHECK(loop.horseshoe->m == 2);
  CHECK(loop.horseshoe->t_cycle == doctest::Approx(5.0));
  CHECK(loop.estimate == doctest::Approx(0.1386).epsilon(1e-3));
  const auto two = horseshoe_bound(graph_with(2, {{0, 1}, {1, 0}}, 5.0, 1.0), 0.5);
  CHECK(two.horseshoe->m == 2);
  CHECK(two.estimate == doctest::Approx(std::log(2.0) / 12.0));
  CHECK_THROWS_AS(horseshoe_bound(graph_with(1, {}, 0.0, 1.0), 0.5), Error);
}
