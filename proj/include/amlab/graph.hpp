#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amlab/manifolds.hpp"

namespace amlab {

struct NodeCurves {
  /// unstable +, unstable -, stable +, stable -; empty when not hyperbolic
  std::vector<ManifoldCurve> curves;
};

struct GraphEdge {
  int from = 0;
  int to = 0;
  /// transverse crossings that persist under spacing halving
  std::vector<Crossing> crossings;
  /// shortest transit time over the crossings
  double transit = 0.0;
  /// coarsest polyline spacing or seed offset involved
  double resolution = 0.0;
};

struct ConnectionGraph {
  CellPeriods periods;
  double s_period = 1.0;
  std::vector<PeriodicOrbit> nodes;
  std::vector<NodeCurves> curves;
  std::vector<GraphEdge> edges;
  /// crossings rejected as tangential (angle below the threshold)
  std::vector<Crossing> tangential;
  /// transverse crossings that did not survive the resolution check
  std::vector<Crossing> transient;
  std::vector<std::string> notes;
};

struct GraphOptions {
  ManifoldOptions manifold;
  IntersectionOptions intersections;
  bool check_persistence = true;
  /// persistence: the crossing reappears within this distance at half spacing
  double persistence_tol = 1e-3;
  /// self-loops on a single node use only the unshifted curves
  bool zero_shift_self = true;
};

/// Graph of transverse heteroclinic and homoclinic connections between
/// hyperbolic orbits sharing one section.
ConnectionGraph build_connection_graph(const TonelliLagrangian& L, const std::vector<PeriodicOrbit>& orbits,
                                       const GraphOptions& opt = {});

/// Graph on the double cover R^2/(2Z x Z): the orbit and its translate by
/// (1, 0) become two nodes.
ConnectionGraph double_cover_graph(const TonelliLagrangian& L, const PeriodicOrbit& orbit,
                                   const GraphOptions& opt = {});

struct Cycle {
  std::vector<int> nodes;
  std::vector<int> edges;
  /// sum of edge transits and node periods
  double time = 0.0;
};

/// Strongly connected components (Tarjan), as node lists.
std::vector<std::vector<int>> strongly_connected(int n, const std::vector<GraphEdge>& edges);

/// Shortest cycle by time, if any (self-loops included).
std::optional<Cycle> shortest_cycle(const ConnectionGraph& g);
/// Shortest cycle through a given node.
std::optional<Cycle> shortest_cycle_through(const ConnectionGraph& g, int node);

struct ChainReport {
  double eps = 0.0;
  std::vector<bool> witnessed;
  /// "cycle", "periodic-orbit" or "none"
  std::vector<std::string> via;
  /// smallest eps for which each node is witnessed
  std::vector<double> required;
};

/// eps-chain recurrence of each node over time at least t_min: through a
/// connection cycle or along the orbit itself, whose per-period closure gap
/// is measured with step dt.
ChainReport chain_connectivity(const TonelliLagrangian& L, const ConnectionGraph& g, double eps, double t_min,
                               double dt);

}  // namespace amlab
