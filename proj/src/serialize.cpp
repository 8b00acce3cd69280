#include "amlab/serialize.hpp"

#include <cmath>
#include <limits>

namespace amlab {

json num(double x) { return std::isfinite(x) ? json(x + 0.0) : json(nullptr); }

double num_of(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

namespace {

json nums(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

std::vector<double> nums_of(const json& j) {
  std::vector<double> v;
  for (const auto& e : j) v.push_back(num_of(e));
  return v;
}

json klass(const IntClass& c) { return json::array({c.k, c.l}); }
IntClass klass_of(const json& j) { return {j[0].get<std::int64_t>(), j[1].get<std::int64_t>()}; }

template <class M>
json matrix(const M& m) {
  json a = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (int k = 0; k < m.cols(); ++k) r.push_back(num(m(i, k)));
    a.push_back(r);
  }
  return a;
}

template <class M>
M matrix_of(const json& j) {
  M m;
  for (int i = 0; i < m.rows(); ++i)
    for (int k = 0; k < m.cols(); ++k) m(i, k) = num_of(j[std::size_t(i)][std::size_t(k)]);
  return m;
}

Stability stability_of(const std::string& s) {
  for (Stability st : {Stability::Hyperbolic, Stability::Elliptic, Stability::Degenerate, Stability::Uncertain})
    if (s == to_string(st)) return st;
  throw Error(ErrorKind::InvalidInput, "unknown stability '" + s + "'");
}

json samples(const std::vector<EnergySample>& v) {
  json a = json::array();
  for (const auto& s : v) a.push_back(json::array({num(s.lambda), num(s.energy)}));
  return a;
}

std::vector<EnergySample> samples_of(const json& j) {
  std::vector<EnergySample> v;
  for (const auto& e : j) v.push_back({num_of(e[0]), num_of(e[1])});
  return v;
}

}  // namespace

json to_json(const Vec2& v) { return json::array({num(v(0)), num(v(1))}); }
Vec2 vec2_of(const json& j) { return {num_of(j[0]), num_of(j[1])}; }

json to_json(const DiscreteLoop& l) {
  json nodes = json::array();
  for (const auto& n : l.nodes()) nodes.push_back(to_json(n));
  return {{"period", num(l.period())}, {"homology", klass(l.homology())}, {"nodes", nodes}};
}

DiscreteLoop loop_of(const json& j) {
  std::vector<Vec2> nodes;
  for (const auto& n : j.at("nodes")) nodes.push_back(vec2_of(n));
  return DiscreteLoop(std::move(nodes), num_of(j.at("period")), klass_of(j.at("homology")));
}

json to_json(const LoopMinimum& m) {
  return {{"loop", to_json(m.loop)}, {"action", num(m.action)}, {"grad_norm", num(m.grad_norm)},
          {"residual", num(m.residual)}};
}

LoopMinimum loop_minimum_of(const json& j) {
  LoopMinimum m{loop_of(j.at("loop"))};
  m.action = num_of(j.at("action"));
  m.grad_norm = num_of(j.at("grad_norm"));
  m.residual = num_of(j.at("residual"));
  return m;
}

json to_json(const Section& s) {
  return {{"m", json::array({s.m(0), s.m(1)})},
          {"kappa", klass(s.kappa)},
          {"sigma0", num(s.sigma0)},
          {"energy", num(s.energy)},
          {"periods", json::array({s.periods.p1, s.periods.p2})}};
}

Section section_of(const json& j) {
  Section s;
  s.m = Eigen::Vector2i(j.at("m")[0].get<int>(), j.at("m")[1].get<int>());
  s.kappa = klass_of(j.at("kappa"));
  s.sigma0 = num_of(j.at("sigma0"));
  s.energy = num_of(j.at("energy"));
  s.periods = {j.at("periods")[0].get<int>(), j.at("periods")[1].get<int>()};
  return s;
}

json to_json(const PeriodicOrbit& o) {
  json fl = json::array();
  for (const auto& l : o.floquet.lambda) fl.push_back(json::array({num(l.real()), num(l.imag())}));
  return {{"seed", {{"x", to_json(o.seed.x)}, {"v", to_json(o.seed.v)}}},
          {"period", num(o.period)},
          {"homology", klass(o.homology)},
          {"energy", num(o.energy)},
          {"section", to_json(o.section)},
          {"z", to_json(o.z)},
          {"pn", num(o.pn)},
          {"monodromy", matrix(o.monodromy)},
          {"reduced", matrix(o.reduced)},
          {"floquet", fl},
          {"stability", to_string(o.floquet.stability)},
          {"residual", num(o.residual)},
          {"closure_gap", num(o.closure_gap)},
          {"iterations", o.iterations}};
}

PeriodicOrbit orbit_of(const json& j) {
  PeriodicOrbit o;
  o.seed = {vec2_of(j.at("seed").at("x")), vec2_of(j.at("seed").at("v"))};
  o.period = num_of(j.at("period"));
  o.homology = klass_of(j.at("homology"));
  o.energy = num_of(j.at("energy"));
  o.section = section_of(j.at("section"));
  o.z = vec2_of(j.at("z"));
  o.pn = num_of(j.at("pn"));
  o.monodromy = matrix_of<Mat4>(j.at("monodromy"));
  o.reduced = matrix_of<Mat2>(j.at("reduced"));
  for (std::size_t i = 0; i < 2; ++i)
    o.floquet.lambda[i] = {num_of(j.at("floquet")[i][0]), num_of(j.at("floquet")[i][1])};
  o.floquet.stability = stability_of(j.at("stability").get<std::string>());
  o.residual = num_of(j.at("residual"));
  o.closure_gap = num_of(j.at("closure_gap"));
  o.iterations = j.at("iterations").get<int>();
  return o;
}

json to_json(const OmegaResult& w) {
  json br = json::array();
  for (const auto& [a, b] : w.brackets) br.push_back(json::array({num(a), num(b)}));
  return {{"omega", to_json(w.omega.w)},
          {"lambda0", num(w.lambda0)},
          {"lambda_discrete", num(w.lambda_discrete)},
          {"h0", klass(w.h0)},
          {"k0", klass(w.k0)},
          {"g", w.g},
          {"energy", num(w.energy)},
          {"period", num(w.period)},
          {"alpha", num(w.alpha)},
          {"validation_gap", num(w.validation_gap)},
          {"witness", to_json(w.witness)},
          {"orbit", to_json(w.orbit)},
          {"scan", samples(w.scan)},
          {"bisection", samples(w.bisection)},
          {"brackets", br}};
}

OmegaResult omega_result_of(const json& j) {
  OmegaResult w(loop_minimum_of(j.at("witness")));
  w.omega = {vec2_of(j.at("omega"))};
  w.lambda0 = num_of(j.at("lambda0"));
  w.lambda_discrete = num_of(j.at("lambda_discrete"));
  w.h0 = klass_of(j.at("h0"));
  w.k0 = klass_of(j.at("k0"));
  w.g = j.at("g").get<std::int64_t>();
  w.energy = num_of(j.at("energy"));
  w.period = num_of(j.at("period"));
  w.alpha = num_of(j.at("alpha"));
  w.validation_gap = num_of(j.at("validation_gap"));
  w.orbit = orbit_of(j.at("orbit"));
  w.scan = samples_of(j.at("scan"));
  w.bisection = samples_of(j.at("bisection"));
  for (const auto& b : j.at("brackets")) w.brackets.push_back({num_of(b[0]), num_of(b[1])});
  return w;
}

json to_json(const MatherSetProxy& p) {
  json members = json::array();
  for (const auto& m : p.members)
    members.push_back({{"orbit", to_json(m.orbit)},
                       {"loop", to_json(m.loop)},
                       {"average_action", num(m.average_action)},
                       {"rotation_residual", num(m.rotation_residual)}});
  return {{"omega", to_json(p.omega.w)},
          {"energy", num(p.energy)},
          {"status", p.status},
          {"members", members},
          {"family", p.family ? to_json(*p.family) : json(nullptr)},
          {"starts_converged", p.starts_converged},
          {"dropped_non_minimizing", p.dropped_non_minimizing},
          {"hessian_gap", num(p.hessian_gap)},
          {"k_bound", num(p.k_bound)},
          {"l_bound", num(p.l_bound)},
          {"bounds_hold", p.bounds_hold},
          {"disjoint", p.disjoint},
          {"min_separation", num(p.min_separation)},
          {"notes", p.notes}};
}

MatherSetProxy proxy_of(const json& j) {
  MatherSetProxy p;
  p.omega = {vec2_of(j.at("omega"))};
  p.energy = num_of(j.at("energy"));
  p.status = j.at("status").get<std::string>();
  for (const auto& m : j.at("members"))
    p.members.push_back({orbit_of(m.at("orbit")), loop_of(m.at("loop")), num_of(m.at("average_action")),
                         num_of(m.at("rotation_residual"))});
  if (!j.at("family").is_null()) p.family = loop_of(j.at("family"));
  p.starts_converged = j.at("starts_converged").get<int>();
  p.dropped_non_minimizing = j.at("dropped_non_minimizing").get<int>();
  p.hessian_gap = num_of(j.at("hessian_gap"));
  p.k_bound = num_of(j.at("k_bound"));
  p.l_bound = num_of(j.at("l_bound"));
  p.bounds_hold = j.at("bounds_hold").get<bool>();
  p.disjoint = j.at("disjoint").get<bool>();
  p.min_separation = num_of(j.at("min_separation"));
  p.notes = j.at("notes").get<std::vector<std::string>>();
  return p;
}

json to_json(const Crossing& c) {
  return {{"point", to_json(c.point)},       {"angle", num(c.angle)}, {"age_unstable", num(c.age_unstable)},
          {"age_stable", num(c.age_stable)}, {"shift", num(c.shift)}, {"transverse", c.transverse}};
}

Crossing crossing_of(const json& j) {
  Crossing c;
  c.point = vec2_of(j.at("point"));
  c.angle = num_of(j.at("angle"));
  c.age_unstable = num_of(j.at("age_unstable"));
  c.age_stable = num_of(j.at("age_stable"));
  c.shift = num_of(j.at("shift"));
  c.transverse = j.at("transverse").get<bool>();
  return c;
}

json to_json(const ConnectionGraph& g) {
  json nodes = json::array(), edges = json::array(), tang = json::array(), trans = json::array();
  for (const auto& o : g.nodes) nodes.push_back(to_json(o));
  for (const auto& e : g.edges) {
    json xs = json::array();
    for (const auto& c : e.crossings) xs.push_back(to_json(c));
    edges.push_back({{"from", e.from},
                     {"to", e.to},
                     {"transit", num(e.transit)},
                     {"resolution", num(e.resolution)},
                     {"crossings", xs}});
  }
  for (const auto& c : g.tangential) tang.push_back(to_json(c));
  for (const auto& c : g.transient) trans.push_back(to_json(c));
  json curves = json::array();
  for (const auto& nc : g.curves) {
    json cs = json::array();
    for (const auto& c : nc.curves)
      cs.push_back({{"branch", to_string(c.branch)},
                    {"sign", c.sign},
                    {"points", c.points.size()},
                    {"length", num(c.length())},
                    {"max_spacing", num(c.max_spacing())},
                    {"status", c.status}});
    curves.push_back(cs);
  }
  return {{"periods", json::array({g.periods.p1, g.periods.p2})},
          {"s_period", num(g.s_period)},
          {"nodes", nodes},
          {"edges", edges},
          {"tangential", tang},
          {"transient", trans},
          {"curves", curves},
          {"notes", g.notes}};
}

ConnectionGraph graph_of(const json& j) {
  ConnectionGraph g;
  g.periods = {j.at("periods")[0].get<int>(), j.at("periods")[1].get<int>()};
  g.s_period = num_of(j.at("s_period"));
  for (const auto& o : j.at("nodes")) g.nodes.push_back(orbit_of(o));
  for (const auto& e : j.at("edges")) {
    GraphEdge ge;
    ge.from = e.at("from").get<int>();
    ge.to = e.at("to").get<int>();
    ge.transit = num_of(e.at("transit"));
    ge.resolution = num_of(e.at("resolution"));
    for (const auto& c : e.at("crossings")) ge.crossings.push_back(crossing_of(c));
    g.edges.push_back(std::move(ge));
  }
  for (const auto& c : j.at("tangential")) g.tangential.push_back(crossing_of(c));
  for (const auto& c : j.at("transient")) g.transient.push_back(crossing_of(c));
  g.notes = j.at("notes").get<std::vector<std::string>>();
  return g;
}

json to_json(const Cycle& c) { return {{"nodes", c.nodes}, {"edges", c.edges}, {"time", num(c.time)}}; }

json to_json(const EntropyReport& r) {
  json cov = json::array(), lyap = json::array();
  for (const auto& row : r.covering)
    cov.push_back({{"delta", num(row.delta)},
                   {"counts", row.counts},
                   {"slope", num(row.slope)},
                   {"resolution_limited", row.resolution_limited}});
  for (const auto& run : r.lyapunov)
    lyap.push_back({{"start", {{"x", to_json(run.start.x)}, {"v", to_json(run.start.v)}}},
                    {"exponent", num(run.exponent)},
                    {"series", nums(run.series)},
                    {"valid", run.valid}});
  json hs = nullptr;
  if (r.horseshoe)
    hs = {{"cycle", to_json(r.horseshoe->cycle)}, {"m", r.horseshoe->m}, {"t_cycle", num(r.horseshoe->t_cycle)}};
  return {{"c", num(r.c)},           {"method", r.method}, {"estimate", num(r.estimate)}, {"status", r.status},
          {"certificate", r.certificate}, {"covering", cov}, {"t_grid", nums(r.t_grid)}, {"lyapunov", lyap},
          {"horseshoe", hs},         {"notes", r.notes}};
}

EntropyReport entropy_of(const json& j) {
  EntropyReport r;
  r.c = num_of(j.at("c"));
  r.method = j.at("method").get<std::string>();
  r.estimate = num_of(j.at("estimate"));
  r.status = j.at("status").get<std::string>();
  r.certificate = j.at("certificate").get<bool>();
  for (const auto& row : j.at("covering"))
    r.covering.push_back({num_of(row.at("delta")), row.at("counts").get<std::vector<std::size_t>>(),
                          num_of(row.at("slope")), row.at("resolution_limited").get<bool>()});
  r.t_grid = nums_of(j.at("t_grid"));
  for (const auto& run : j.at("lyapunov")) {
    LyapunovRun lr;
    lr.start = {vec2_of(run.at("start").at("x")), vec2_of(run.at("start").at("v"))};
    lr.exponent = num_of(run.at("exponent"));
    lr.series = nums_of(run.at("series"));
    lr.valid = run.at("valid").get<bool>();
    r.lyapunov.push_back(std::move(lr));
  }
  if (!j.at("horseshoe").is_null()) {
    const auto& h = j.at("horseshoe");
    HorseshoeData d;
    d.cycle.nodes = h.at("cycle").at("nodes").get<std::vector<int>>();
    d.cycle.edges = h.at("cycle").at("edges").get<std::vector<int>>();
    d.cycle.time = num_of(h.at("cycle").at("time"));
    d.m = h.at("m").get<int>();
    d.t_cycle = num_of(h.at("t_cycle"));
    r.horseshoe = d;
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

json to_json(const ValidationReport& r) {
  return {{"min_hessian_eigenvalue", num(r.min_hessian_eigenvalue)},
          {"superlinearity", nums(r.superlinearity)},
          {"superlinear", r.superlinear},
          {"max_derivative_mismatch", num(r.max_derivative_mismatch)},
          {"states_checked", r.states_checked}};
}

json to_json(const BarrierSample& b) {
  return {{"x", to_json(b.x.x)},          {"y", to_json(b.y.x)},         {"omega", to_json(b.omega.w)},
          {"alpha", num(b.alpha)},        {"t_grid", nums(b.t_grid)},    {"values", nums(b.values)},
          {"running", nums(b.running)},   {"running_min", num(b.running_min)}, {"failures", b.failures}};
}

BarrierSample barrier_of(const json& j) {
  BarrierSample b;
  b.x = {vec2_of(j.at("x"))};
  b.y = {vec2_of(j.at("y"))};
  b.omega = {vec2_of(j.at("omega"))};
  b.alpha = num_of(j.at("alpha"));
  b.t_grid = nums_of(j.at("t_grid"));
  b.values = nums_of(j.at("values"));
  b.running = nums_of(j.at("running"));
  b.running_min = num_of(j.at("running_min"));
  b.failures = j.at("failures").get<int>();
  return b;
}

}  // namespace amlab
