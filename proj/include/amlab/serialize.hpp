#pragma once

#include "amlab/config.hpp"
#include "amlab/entropy.hpp"
#include "amlab/graph.hpp"
#include "amlab/mather.hpp"
#include "amlab/variational.hpp"

namespace amlab {

/// JSON forms of the pipeline objects. Doubles round-trip exactly;
/// non-finite values are written as null and read back as NaN.
json num(double x);
double num_of(const json& j);

json to_json(const Vec2& v);
Vec2 vec2_of(const json& j);
json to_json(const DiscreteLoop& l);
DiscreteLoop loop_of(const json& j);
json to_json(const LoopMinimum& m);
LoopMinimum loop_minimum_of(const json& j);
json to_json(const Section& s);
Section section_of(const json& j);
json to_json(const PeriodicOrbit& o);
PeriodicOrbit orbit_of(const json& j);
json to_json(const OmegaResult& w);
OmegaResult omega_result_of(const json& j);
json to_json(const MatherSetProxy& p);
MatherSetProxy proxy_of(const json& j);
json to_json(const Crossing& c);
Crossing crossing_of(const json& j);
/// Without the manifold curves.
json to_json(const ConnectionGraph& g);
ConnectionGraph graph_of(const json& j);
json to_json(const Cycle& c);
json to_json(const EntropyReport& r);
EntropyReport entropy_of(const json& j);
json to_json(const ValidationReport& r);
json to_json(const BarrierSample& b);
BarrierSample barrier_of(const json& j);

}  // namespace amlab
