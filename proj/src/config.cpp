#include "amlab/config.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace amlab {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// object reader that remembers which keys were consumed
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }

  const json& raw(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }

  Node object(const std::string& k) { return Node(raw(k), join(path_, k)); }

  double number(const std::string& k, std::optional<double> def = {}, bool positive = false) {
    if (!has(k)) {
      if (def) return *def;
      throw ConfigError(join(path_, k), "missing required field");
    }
    const json& v = raw(k);
    if (!v.is_number()) throw ConfigError(join(path_, k), "expected a number");
    const double x = v.get<double>();
    if (positive && !(x > 0.0)) throw ConfigError(join(path_, k), "must be positive");
    return x;
  }

  std::int64_t integer(const std::string& k, std::optional<std::int64_t> def = {}, bool positive = false) {
    if (!has(k)) {
      if (def) return *def;
      throw ConfigError(join(path_, k), "missing required field");
    }
    const json& v = raw(k);
    if (!v.is_number_integer()) throw ConfigError(join(path_, k), "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (positive && x <= 0) throw ConfigError(join(path_, k), "must be positive");
    return x;
  }

  std::vector<double> numbers(const std::string& k, std::vector<double> def, bool positive) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_array() || v.empty()) throw ConfigError(join(path_, k), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(join(path_, k), "expected a non-empty array of numbers");
      out.push_back(e.get<double>());
      if (positive && !(out.back() > 0.0)) throw ConfigError(join(path_, k), "entries must be positive");
    }
    return out;
  }

  std::string string(const std::string& k) {
    if (!has(k)) throw ConfigError(join(path_, k), "missing required field");
    const json& v = raw(k);
    if (!v.is_string()) throw ConfigError(join(path_, k), "expected a string");
    return v.get<std::string>();
  }

  FourierSeries series(const std::string& k) {
    if (!has(k)) return {};
    const std::string p = join(path_, k);
    const json& v = raw(k);
    double scale = 1.0;
    const json* terms = &v;
    if (v.is_object()) {
      Node n(v, p);
      scale = n.number("scale", 1.0);
      if (!n.has("terms")) throw ConfigError(p + ".terms", "missing required field");
      terms = &n.raw("terms");
      n.finish();
    }
    if (!terms->is_array()) throw ConfigError(p, "expected an array of [m, n, a, b] terms");
    std::vector<FourierTerm> out;
    for (const auto& t : *terms) {
      if (!t.is_array() || t.size() != 4 || !t[0].is_number_integer() || !t[1].is_number_integer() ||
          !t[2].is_number() || !t[3].is_number())
        throw ConfigError(p, "each term is [m, n, a, b] with integer m, n");
      out.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>(), t[3].get<double>()});
    }
    return FourierSeries(std::move(out), scale);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  Node root(doc, "");
  {
    Node l = root.object("lagrangian");
    try {
      c.lagrangian.family = family_from_string(l.string("family"));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("lagrangian.family", e.what());
    }
    c.lagrangian.potential = l.series("potential");
    c.lagrangian.a1 = l.series("a1");
    c.lagrangian.a2 = l.series("a2");
    c.lagrangian.g11 = l.series("g11");
    c.lagrangian.g12 = l.series("g12");
    c.lagrangian.g22 = l.series("g22");
    c.lagrangian.quartic = l.series("quartic");
    c.lagrangian.max_harmonic = int(l.integer("max_harmonic", 4));
    l.finish();
  }
  c.energy = root.number("energy");
  {
    if (!root.has("h0")) throw ConfigError("h0", "missing required field");
    const json& h = root.raw("h0");
    if (!h.is_array() || h.size() != 2 || !h[0].is_number_integer() || !h[1].is_number_integer())
      throw ConfigError("h0", "expected [k, l] integers");
    c.h0 = {h[0].get<std::int64_t>(), h[1].get<std::int64_t>()};
    if (c.h0.is_zero()) throw ConfigError("h0", "must be non-zero");
  }
  c.seed = std::uint64_t(root.integer("seed", 1));
  if (root.has("solver")) {
    Node s = root.object("solver");
    c.solver.dt = s.number("dt", c.solver.dt, true);
    c.solver.newton_tol = s.number("newton_tol", c.solver.newton_tol, true);
    c.solver.newton_max_iter = int(s.integer("newton_max_iter", c.solver.newton_max_iter, true));
    c.solver.beta_starts = int(s.integer("beta_starts", c.solver.beta_starts, true));
    c.solver.proxy_starts = int(s.integer("proxy_starts", c.solver.proxy_starts, true));
    c.solver.nodes_per_time = int(s.integer("nodes_per_time", c.solver.nodes_per_time, true));
    c.solver.margin = s.number("margin", c.solver.margin, true);
    s.finish();
  }
  if (root.has("grid")) {
    Node g = root.object("grid");
    c.grid.max_denominator = int(g.integer("max_denominator", c.grid.max_denominator, true));
    c.grid.max_numerator = int(g.integer("max_numerator", c.grid.max_numerator, true));
    c.grid.max_norm = g.number("max_norm", c.grid.max_norm, true);
    g.finish();
  }
  if (root.has("manifold")) {
    Node m = root.object("manifold");
    c.manifold.eps0 = m.number("eps0", c.manifold.eps0, true);
    c.manifold.spacing = m.number("spacing", c.manifold.spacing, true);
    c.manifold.max_steps = int(m.integer("max_steps", c.manifold.max_steps, true));
    c.manifold.max_points = int(m.integer("max_points", c.manifold.max_points, true));
    c.manifold.max_length = m.number("max_length", c.manifold.max_length, true);
    c.manifold.ret.dt = m.number("return_dt", c.manifold.ret.dt, true);
    m.finish();
  }
  if (root.has("entropy")) {
    Node e = root.object("entropy");
    c.entropy.samples = std::size_t(e.integer("samples", std::int64_t(c.entropy.samples), true));
    c.entropy.t_grid = e.numbers("t_grid", c.entropy.t_grid, true);
    c.entropy.delta_grid = e.numbers("delta_grid", c.entropy.delta_grid, true);
    c.entropy.covering_dt = e.number("covering_dt", c.entropy.covering_dt, true);
    c.entropy.lyapunov_orbits = int(e.integer("lyapunov_orbits", c.entropy.lyapunov_orbits, true));
    c.entropy.lyapunov_time = e.number("lyapunov_time", c.entropy.lyapunov_time, true);
    c.entropy.renorm_dt = e.number("renorm_dt", c.entropy.renorm_dt, true);
    e.finish();
    if (c.entropy.t_grid.size() < 2) throw ConfigError("entropy.t_grid", "needs at least two times");
  }
  if (root.has("barrier")) {
    Node b = root.object("barrier");
    c.barrier.t_min = b.number("t_min", c.barrier.t_min, true);
    c.barrier.t_max = b.number("t_max", c.barrier.t_max, true);
    c.barrier.t_points = int(b.integer("t_points", c.barrier.t_points, true));
    c.barrier.orbit_points = int(b.integer("orbit_points", c.barrier.orbit_points, true));
    b.finish();
    if (c.barrier.t_max < 20.0 || c.barrier.t_min >= c.barrier.t_max || c.barrier.t_points < 2)
      throw ConfigError("barrier", "needs t_min < t_max, t_max >= 20 and at least two points");
  }
  root.finish();
  try {
    (void)c.make_lagrangian();
  } catch (const Error& e) {
    throw ConfigError("lagrangian", e.what());
  }
  c.canonical = doc;
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  // reject duplicate keys, which the DOM would silently collapse
  std::vector<std::set<std::string>> keys;
  std::string dup;
  auto cb = [&](int, json::parse_event_t ev, json& parsed) {
    if (ev == json::parse_event_t::object_start) keys.emplace_back();
    else if (ev == json::parse_event_t::object_end) keys.pop_back();
    else if (ev == json::parse_event_t::key && !keys.empty() && !keys.back().insert(parsed.get<std::string>()).second &&
             dup.empty())
      dup = parsed.get<std::string>();
    return true;
  };
  json doc;
  try {
    doc = json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  if (!dup.empty()) throw ConfigError(dup, "duplicate key");
  return config_from_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_text(const json& doc) { return doc.dump(); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
  json d = cfg.canonical;
  d["seed"] = cfg.seed;
  return sha256_hex(canonical_text(d));
}

json with_value(const json& doc, const std::string& path, const json& value) {
  json out = doc;
  json* cur = &out;
  std::string rest = path;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key = rest.substr(0, dot);
    if (!cur->is_object()) throw ConfigError(path, "parent is not an object");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return out;
    }
    if (!cur->contains(key)) throw ConfigError(path, "path does not resolve in the config");
    cur = &(*cur)[key];
    rest = rest.substr(dot + 1);
  }
}

}  // namespace amlab
