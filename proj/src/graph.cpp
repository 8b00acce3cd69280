#include "amlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "amlab/cover.hpp"
#include "amlab/parallel.hpp"

namespace amlab {

namespace {

NodeCurves compute_curves(const TonelliLagrangian& L, const PeriodicOrbit& o, const ManifoldOptions& mo) {
  NodeCurves nc;
  if (o.floquet.stability != Stability::Hyperbolic) return nc;
  nc.curves = parallel_map<ManifoldCurve>(4, [&](std::size_t i) {
    const Branch b = i < 2 ? Branch::Unstable : Branch::Stable;
    const int sign = i % 2 == 0 ? 1 : -1;
    return globalize_manifold(L, o, b, sign, mo);
  });
  return nc;
}

bool same_section(const Section& a, const Section& b) {
  return a.m == b.m && a.kappa == b.kappa && std::abs(a.sigma0 - b.sigma0) < 1e-12;
}

ConnectionGraph assemble(ConnectionGraph g, const std::vector<NodeCurves>& fine, const GraphOptions& opt) {
  const int n = int(g.nodes.size());
  std::vector<Vec2> fixed;
  for (const auto& o : g.nodes) fixed.push_back(o.z);
  for (int i = 0; i < n; ++i) {
    if (g.curves[std::size_t(i)].curves.empty()) continue;
    for (int j = 0; j < n; ++j) {
      if (g.curves[std::size_t(j)].curves.empty()) continue;
      GraphEdge edge;
      edge.from = i;
      edge.to = j;
      edge.transit = std::numeric_limits<double>::infinity();
      IntersectionOptions ix = opt.intersections;
      ix.zero_shift_only = ix.zero_shift_only || (i == j && opt.zero_shift_self);
      for (int a = 0; a < 2; ++a) {
        for (int b = 2; b < 4; ++b) {
          const auto& cu = g.curves[std::size_t(i)].curves[std::size_t(a)];
          const auto& cs = g.curves[std::size_t(j)].curves[std::size_t(b)];
          const auto xs = find_crossings(cu, cs, g.s_period, fixed, ix);
          std::vector<Crossing> fine_xs;
          bool fine_done = false;
          for (const auto& x : xs) {
            if (!x.transverse) {
              g.tangential.push_back(x);
              continue;
            }
            bool persists = true;
            if (opt.check_persistence) {
              if (!fine_done) {
                fine_xs = find_crossings(fine[std::size_t(i)].curves[std::size_t(a)],
                                         fine[std::size_t(j)].curves[std::size_t(b)], g.s_period, fixed, ix);
                fine_done = true;
              }
              persists = std::any_of(fine_xs.begin(), fine_xs.end(), [&](const Crossing& f) {
                return f.transverse && f.shift == x.shift && (f.point - x.point).norm() <= opt.persistence_tol;
              });
            }
            if (!persists) {
              g.transient.push_back(x);
              continue;
            }
            edge.crossings.push_back(x);
            edge.transit = std::min(edge.transit, x.age_unstable + x.age_stable);
            edge.resolution = std::max({edge.resolution, opt.manifold.eps0, cu.max_spacing(), cs.max_spacing()});
          }
        }
      }
      if (!edge.crossings.empty()) g.edges.push_back(std::move(edge));
    }
  }
  return g;
}

ManifoldOptions halved(const ManifoldOptions& mo) {
  ManifoldOptions f = mo;
  f.spacing *= 0.5;
  f.max_points *= 2;
  return f;
}

}  // namespace

ConnectionGraph build_connection_graph(const TonelliLagrangian& L, const std::vector<PeriodicOrbit>& orbits,
                                       const GraphOptions& opt) {
  ConnectionGraph g;
  if (orbits.empty()) return g;
  const Section& sec = orbits.front().section;
  g.periods = sec.periods;
  g.s_period = sec.s_period();
  for (const auto& o : orbits) {
    if (same_section(o.section, sec)) {
      g.nodes.push_back(o);
    } else {
      RefineOptions ro;
      ro.energy = o.energy;
      ro.dt = opt.manifold.ret.dt;
      Section target = sec;
      target.energy = o.energy;
      g.nodes.push_back(resection(L, o, target, ro));
    }
  }
  for (const auto& o : g.nodes) {
    g.curves.push_back(compute_curves(L, o, opt.manifold));
    if (g.curves.back().curves.empty())
      g.notes.push_back(fmt::format("node {} is {}; no invariant curves", g.curves.size() - 1,
                                    to_string(o.floquet.stability)));
  }
  std::vector<NodeCurves> fine;
  if (opt.check_persistence)
    for (const auto& o : g.nodes) fine.push_back(compute_curves(L, o, halved(opt.manifold)));
  return assemble(std::move(g), fine, opt);
}

ConnectionGraph double_cover_graph(const TonelliLagrangian& L, const PeriodicOrbit& orbit, const GraphOptions& opt) {
  const CoverLagrangian cover(L);
  const auto [base, copy] = cover.lift(orbit);
  ConnectionGraph g;
  g.periods = cover.periods();
  g.s_period = base.section.s_period();
  g.nodes = {base, copy};
  const Vec2 dz = copy.z - base.z;
  auto shift_all = [&](const NodeCurves& nc) {
    NodeCurves out;
    for (const auto& c : nc.curves) out.curves.push_back(c.shifted(dz));
    return out;
  };
  // the dynamics commutes with the translation, so the copy's curves are translates
  const NodeCurves c0 = compute_curves(L, base, opt.manifold);
  g.curves = {c0, shift_all(c0)};
  if (c0.curves.empty()) g.notes.push_back("orbit is not hyperbolic; no invariant curves");
  std::vector<NodeCurves> fine;
  if (opt.check_persistence) {
    const NodeCurves f0 = compute_curves(L, base, halved(opt.manifold));
    fine = {f0, shift_all(f0)};
  }
  return assemble(std::move(g), fine, opt);
}

std::vector<std::vector<int>> strongly_connected(int n, const std::vector<GraphEdge>& edges) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : edges) adj[std::size_t(e.from)].push_back(e.to);
  std::vector<int> index(std::size_t(n), -1), low(std::size_t(n), 0);
  std::vector<bool> on(std::size_t(n), false);
  std::vector<int> stack;
  std::vector<std::vector<int>> out;
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    index[std::size_t(v)] = low[std::size_t(v)] = counter++;
    stack.push_back(v);
    on[std::size_t(v)] = true;
    for (int w : adj[std::size_t(v)]) {
      if (index[std::size_t(w)] < 0) {
        visit(w);
        low[std::size_t(v)] = std::min(low[std::size_t(v)], low[std::size_t(w)]);
      } else if (on[std::size_t(w)]) {
        low[std::size_t(v)] = std::min(low[std::size_t(v)], index[std::size_t(w)]);
      }
    }
    if (low[std::size_t(v)] == index[std::size_t(v)]) {
      std::vector<int> comp;
      int w = -1;
      do {
        w = stack.back();
        stack.pop_back();
        on[std::size_t(w)] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      out.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[std::size_t(v)] < 0) visit(v);
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Cycle> shortest_cycle_through(const ConnectionGraph& g, int s) {
  const int n = int(g.nodes.size());
  const double inf = std::numeric_limits<double>::infinity();
  auto weight = [&](const GraphEdge& e) { return e.transit + g.nodes[std::size_t(e.to)].period; };
  std::vector<double> dist(std::size_t(n), inf);
  std::vector<int> pred(std::size_t(n), -1);
  dist[std::size_t(s)] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  pq.push({0.0, s});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[std::size_t(u)]) continue;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto& e = g.edges[k];
      if (e.from != u || e.to == s) continue;
      const double nd = d + weight(e);
      if (nd < dist[std::size_t(e.to)]) {
        dist[std::size_t(e.to)] = nd;
        pred[std::size_t(e.to)] = int(k);
        pq.push({nd, e.to});
      }
    }
  }
  std::optional<Cycle> best;
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    if (e.to != s || !std::isfinite(dist[std::size_t(e.from)])) continue;
    const double cost = dist[std::size_t(e.from)] + weight(e);
    if (best && cost >= best->time) continue;
    Cycle c;
    c.time = cost;
    c.edges.push_back(int(k));
    for (int v = e.from; v != s; v = g.edges[std::size_t(pred[std::size_t(v)])].from)
      c.edges.push_back(pred[std::size_t(v)]);
    std::reverse(c.edges.begin(), c.edges.end());
    for (int ei : c.edges) c.nodes.push_back(g.edges[std::size_t(ei)].from);
    best = std::move(c);
  }
  return best;
}

std::optional<Cycle> shortest_cycle(const ConnectionGraph& g) {
  std::optional<Cycle> best;
  for (int s = 0; s < int(g.nodes.size()); ++s) {
    auto c = shortest_cycle_through(g, s);
    if (c && (!best || c->time < best->time)) best = std::move(c);
  }
  return best;
}

ChainReport chain_connectivity(const TonelliLagrangian& L, const ConnectionGraph& g, double eps, double t_min,
                               double dt) {
  ChainReport r;
  r.eps = eps;
  for (int i = 0; i < int(g.nodes.size()); ++i) {
    const auto& o = g.nodes[std::size_t(i)];
    double via_cycle = std::numeric_limits<double>::infinity();
    if (auto c = shortest_cycle_through(g, i)) {
      via_cycle = 0.0;
      for (int e : c->edges) via_cycle = std::max(via_cycle, g.edges[std::size_t(e)].resolution);
    }
    // the pseudo-orbit follows the orbit and jumps back to the seed once per period
    const PhasePoint end = propagate(L, o.seed, o.period, dt);
    Vec4 gap;
    gap << end.x - o.homology.as_vec() - o.seed.x, end.v - o.seed.v;
    const double via_orbit = o.period > 0 && t_min >= 0 ? gap.norm() : std::numeric_limits<double>::infinity();
    const double need = std::min(via_cycle, via_orbit);
    r.required.push_back(need);
    r.witnessed.push_back(eps >= need);
    if (eps < need)
      r.via.push_back("none");
    else
      r.via.push_back(via_cycle <= eps ? "cycle" : "periodic-orbit");
  }
  return r;
}

}  // namespace amlab
