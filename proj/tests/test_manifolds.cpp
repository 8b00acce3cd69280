#include <doctest.h>

#include <cmath>

#include "amlab/graph.hpp"
#include "amlab/parallel.hpp"
#include "fixtures.hpp"

using namespace amlab;

namespace {

double distance_to_polyline(const Vec2& p, const std::vector<Vec2>& poly) {
  double best = 1e300;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 a = poly[i], d = poly[i + 1] - poly[i];
    const double t = std::clamp((p - a).dot(d) / std::max(d.squaredNorm(), 1e-300), 0.0, 1.0);
    best = std::min(best, (a + t * d - p).norm());
  }
  return best;
}

// vertical orbit of the separable system, sectioned on the symmetry line x2 = 1/2
PeriodicOrbit symmetric_orbit(const TonelliLagrangian& L) {
  const Section sec = make_section({0, 1}, Vec2(0.0, 0.5), Vec2(0.0, 1.0), 0.5);
  const PhasePoint guess{Vec2(0.0, 0.5), Vec2(0.0, 1.0)};
  return refine_on_section(L, sec, sec.project(L, guess), sec.normal_momentum(L, guess));
}

}  // namespace

TEST_CASE("seed segment scales with the multiplier") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  const auto o = symmetric_orbit(L);
  REQUIRE(o.floquet.stability == Stability::Hyperbolic);
  const double lam = o.floquet.lambda[0].real();
  ManifoldOptions mo;
  mo.max_steps = 2;
  const auto u = globalize_manifold(L, o, Branch::Unstable, 1, mo);
  const auto r = section_return(L, o.section, u.points.front(), +1, o.pn, false, mo.ret);
  REQUIRE(r);
  const double d = (r->z - o.z).norm() / mo.eps0;
  CHECK(d > 0.9 * lam);
  CHECK(d < 1.1 * lam);

  // backward iterates of a point on the unstable curve approach the orbit at rate 1/lambda
  ManifoldOptions far = mo;
  far.max_steps = 5;
  const auto u5 = globalize_manifold(L, o, Branch::Unstable, 1, far);
  Vec2 z = u5.points.back();
  double pn = o.pn;
  double prev = (z - o.z).norm();
  for (int k = 0; k < 4; ++k) {
    const auto b = section_return(L, o.section, z, -1, pn, false, mo.ret);
    REQUIRE(b);
    z = b->z;
    pn = o.section.normal_momentum(L, b->end);
    const double cur = (z - o.z).norm();
    const double ratio = cur / prev;
    CHECK(ratio > 0.8 / lam);
    CHECK(ratio < 1.2 / lam);
    prev = cur;
  }
}

TEST_CASE("reversible system: stable curve mirrors the unstable curve") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  const auto o = symmetric_orbit(L);
  ManifoldOptions mo;
  mo.max_steps = 6;
  const auto u = globalize_manifold(L, o, Branch::Unstable, 1, mo);
  const auto s = globalize_manifold(L, o, Branch::Stable, 1, mo);
  REQUIRE(u.points.size() > 20);
  double worst = 0.0;
  for (const auto& p : u.points) worst = std::max(worst, distance_to_polyline(Vec2(p(0), -p(1)), s.points));
  CHECK(worst <= 1e-4);
  CHECK(u.max_spacing() <= mo.spacing * (1 + 1e-12) + 1e-9);
}

TEST_CASE("cycle search on a hand-built graph") {
  ConnectionGraph g;
  g.nodes.resize(3);
  for (auto& n : g.nodes) n.period = 1.0;
  auto edge = [](int a, int b, double t) {
    GraphEdge e;
    e.from = a;
    e.to = b;
    e.transit = t;
    return e;
  };
  g.edges = {edge(0, 1, 2.0), edge(1, 0, 3.0), edge(1, 2, 1.0)};
  const auto scc = strongly_connected(3, g.edges);
  REQUIRE(scc.size() == 2);
  CHECK(scc[0] == std::vector<int>{0, 1});
  CHECK(scc[1] == std::vector<int>{2});
  const auto c = shortest_cycle(g);
  REQUIRE(c);
  CHECK(c->time == doctest::Approx(2.0 + 3.0 + 2.0));
  CHECK(c->edges.size() == 2);
  CHECK_FALSE(shortest_cycle_through(g, 2));
  g.edges.push_back(edge(2, 2, 0.5));
  CHECK(shortest_cycle_through(g, 2)->time == doctest::Approx(1.5));
}

TEST_CASE("separable potential: connections are tangential only") {
  set_workers(4);
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  RefineOptions ro;
  ro.energy = 0.5;
  const auto o = refine_orbit(L, DiscreteLoop::straight(Vec2::Zero(), {0, 1}, 1.0, 64), ro);
  const auto base = build_connection_graph(L, {o});
  CHECK(base.edges.empty());
  const auto cover = double_cover_graph(L, o);
  CHECK(cover.nodes.size() == 2);
  CHECK(cover.s_period == 2.0);
  CHECK(cover.edges.empty());
  CHECK(!cover.tangential.empty());
  for (const auto& x : cover.tangential) CHECK(x.angle < 1e-2);
  set_workers(1);
}

TEST_CASE("coupled potential: transverse cycle on the double cover") {
  set_workers(4);
  const auto L = TonelliLagrangian::mechanical(FourierSeries({{1, 0, 1, 0}, {0, 1, 1, 0}, {1, 1, 0.2, 0}}, 0.05));
  RefineOptions ro;
  ro.energy = 0.5;
  const auto o = refine_orbit(L, DiscreteLoop::straight(Vec2::Zero(), {0, 1}, 1.0, 64), ro);
  REQUIRE(o.floquet.stability == Stability::Hyperbolic);
  const auto cover = double_cover_graph(L, o);
  const auto c = shortest_cycle(cover);
  REQUIRE(c);
  for (int e : c->edges)
    for (const auto& x : cover.edges[std::size_t(e)].crossings) CHECK(x.angle >= 1e-2);

  const auto fine = chain_connectivity(L, cover, 0.02, 10.0, 1e-3);
  CHECK(fine.witnessed[0]);
  CHECK(fine.via[0] == "cycle");
  const auto strict = chain_connectivity(L, cover, 1e-9, 10.0, 0.05);
  CHECK_FALSE(strict.witnessed[0]);
  CHECK(strict.required[0] > 1e-9);
  set_workers(1);
}

TEST_CASE("chain recurrence along an isolated orbit") {
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  RefineOptions ro;
  ro.energy = 0.5;
  ConnectionGraph g;
  g.nodes.push_back(refine_orbit(L, DiscreteLoop::straight(Vec2::Zero(), {0, 1}, 1.0, 64), ro));
  const auto r = chain_connectivity(L, g, 1e-6, 5.0, 1e-3);
  CHECK(r.witnessed[0]);
  CHECK(r.via[0] == "periodic-orbit");
}
