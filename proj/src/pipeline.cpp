#include "amlab/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <unistd.h>

#include "amlab/cover.hpp"
#include "amlab/parallel.hpp"
#include "amlab/serialize.hpp"

namespace amlab {

namespace fs = std::filesystem;

void write_atomic(const std::string& path, const std::string& content) {
  static std::atomic<unsigned> counter{0};
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + fmt::format(".tmp.{}.{}", ::getpid(), counter++);
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::InvalidInput, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

namespace {

constexpr const char* kVersion = "amlab-1";

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string now_iso() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

struct StageFailure {
  int exit_code;
};

int exit_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::NotTonelli:
    case ErrorKind::InconsistentDerivatives: return kExitNotTonelli;
    case ErrorKind::BelowCritical: return kExitSubcritical;
    default: return kExitNumerical;
  }
}

NewtonOptions newton_of(const ExperimentConfig& c) { return {c.solver.newton_tol, c.solver.newton_max_iter}; }

BetaOptions beta_options(const ExperimentConfig& c) {
  BetaOptions b;
  b.starts = c.solver.beta_starts;
  b.nodes_per_time = c.solver.nodes_per_time;
  b.seed = task_seed(c.seed, 1);
  b.newton = newton_of(c);
  return b;
}

RefineOptions refine_options(const ExperimentConfig& c) {
  RefineOptions r;
  r.dt = c.solver.dt;
  return r;
}

CoveringOptions covering_options(const ExperimentConfig& c) {
  CoveringOptions o;
  o.sampling.count = c.entropy.samples;
  o.sampling.seed = task_seed(c.seed, 3);
  o.t_grid = c.entropy.t_grid;
  o.delta_grid = c.entropy.delta_grid;
  o.dt = c.entropy.covering_dt;
  return o;
}

LyapunovOptions lyapunov_options(const ExperimentConfig& c) {
  LyapunovOptions o;
  o.orbits = c.entropy.lyapunov_orbits;
  o.t_total = c.entropy.lyapunov_time;
  o.renorm_dt = c.entropy.renorm_dt;
  o.dt = std::min(c.solver.dt * 10, 1e-2);
  o.seed = task_seed(c.seed, 4);
  return o;
}

std::string manifold_csv(const std::string& tag, const ConnectionGraph& g) {
  std::string s;
  for (std::size_t n = 0; n < g.curves.size(); ++n)
    for (const auto& c : g.curves[n].curves)
      for (std::size_t i = 0; i < c.points.size(); ++i)
        s += fmt::format("{},{},{},{},{},{},{}\n", tag, n, to_string(c.branch), c.sign, c.points[i](0), c.points[i](1),
                         c.ages[i]);
  return s;
}

class Run {
 public:
  Run(const ExperimentConfig& cfg, const RunOptions& opt)
      : cfg_(cfg), opt_(opt), out_(opt.out), hash_(config_hash(cfg)), cache_(out_ / "cache" / hash_) {
    fs::create_directories(out_);
    set_workers(opt.workers);
    started_ = now_iso();
  }

  const std::string& hash() const { return hash_; }
  std::vector<StageRecord>& stages() { return stages_; }

  void emit(const std::string& name, const std::string& content) {
    write_atomic((out_ / name).string(), content);
    files_.insert(name);
  }

  json stage(const std::string& name, const std::function<json()>& compute) {
    StageRecord r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    const fs::path p = cache_ / (name + ".json");
    json payload;
    try {
      if (opt_.resume && fs::exists(p)) {
        payload = json::parse(read_file(p));
        r.cache_hit = true;
      } else {
        payload = compute();
        write_atomic(p.string(), payload.dump());
      }
    } catch (const Error& e) {
      r.status = "failed";
      r.detail = e.what();
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      stages_.push_back(r);
      throw StageFailure{exit_for(e)};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages_.push_back(r);
    return payload;
  }

  void skip(const std::string& name, const std::string& status, const std::string& detail) {
    stages_.push_back({name, status, detail, false, 0.0});
  }

  json finish(int exit_code, bool certificate, json hypotheses, json summary) {
    files_.insert("manifest.json");
    files_.insert("run.json");
    json st = json::array(), timing = json::array();
    for (const auto& s : stages_) {
      st.push_back({{"name", s.name}, {"status", s.status}, {"detail", s.detail}});
      timing.push_back({{"name", s.name}, {"cache", s.cache_hit ? "hit" : "computed"}, {"seconds", s.seconds}});
    }
    json manifest = {{"version", kVersion},
                     {"config_hash", hash_},
                     {"seed", cfg_.seed},
                     {"energy", num(cfg_.energy)},
                     {"stages", st},
                     {"files", std::vector<std::string>(files_.begin(), files_.end())},
                     {"hypotheses", std::move(hypotheses)},
                     {"certificate", certificate},
                     {"exit_code", exit_code},
                     {"summary", std::move(summary)}};
    emit("manifest.json", manifest.dump(2) + "\n");
    // timing and cache use vary between runs; kept out of the manifest
    const json run = {{"started", started_}, {"finished", now_iso()}, {"workers", opt_.workers},
                      {"resume", opt_.resume}, {"stages", timing}};
    emit("run.json", run.dump(2) + "\n");
    return manifest;
  }

 private:
  const ExperimentConfig& cfg_;
  RunOptions opt_;
  fs::path out_;
  std::string hash_;
  fs::path cache_;
  std::string started_;
  std::vector<StageRecord> stages_;
  std::set<std::string> files_;
};

json critical_payload(const TonelliLagrangian& L, const ExperimentConfig& cfg) {
  const BetaOptions bo = beta_options(cfg);
  const auto bs = beta_grid(L, rational_grid(cfg.grid), bo);
  const auto cv = critical_value(L, bs, bo);
  std::ostringstream b, a;
  write_beta_csv(b, bs);
  write_alpha_csv(a, cv.alphas);
  double fenchel = -std::numeric_limits<double>::infinity();
  for (const auto& al : cv.alphas) fenchel = std::max(fenchel, fenchel_violation(al, bs));
  return {{"c0", num(cv.c0)},
          {"min_alpha", num(cv.min_alpha)},
          {"warning", cv.warning ? json(*cv.warning) : json(nullptr)},
          {"fenchel_violation", num(fenchel)},
          {"beta_samples", bs.size()},
          {"beta_csv", b.str()},
          {"alpha_csv", a.str()}};
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& cfg, const RunOptions& opt) {
  Run run(cfg, opt);
  const TonelliLagrangian L = cfg.make_lagrangian();
  run.emit("config.json", cfg.canonical.dump(2) + "\n");
  json hyp = json::object(), summary = json::object();
  bool certificate = false;
  int code = kExitOk;
  try {
    const json val = run.stage("validate", [&] { return to_json(validate_tonelli(L)); });
    run.emit("validation.json", val.dump(2) + "\n");

    const json crit = run.stage("critical-value", [&] { return critical_payload(L, cfg); });
    run.emit("beta.csv", crit.at("beta_csv").get<std::string>());
    run.emit("alpha.csv", crit.at("alpha_csv").get<std::string>());
    const double c0 = num_of(crit.at("c0"));
    summary["c0"] = num(c0);
    summary["c0_min_alpha"] = crit.at("min_alpha");
    if (!crit.at("warning").is_null()) summary["c0_warning"] = crit.at("warning");
    const bool super = cfg.energy > c0 + cfg.solver.margin;
    hyp["supercritical"] = {{"holds", super}, {"c", num(cfg.energy)}, {"c0", num(c0)}, {"margin", num(cfg.solver.margin)}};
    if (!super) {
      run.skip("omega-search", "hypothesis-failed",
               fmt::format("energy {} is not above the measured critical value {:.6f}", cfg.energy, c0));
      PipelineResult r{kExitSubcritical, false, run.stages(), {}};
      r.manifest = run.finish(kExitSubcritical, false, hyp, summary);
      return r;
    }

    const json om = run.stage("omega-search", [&] {
      OmegaOptions oo;
      oo.margin = cfg.solver.margin;
      oo.beta = beta_options(cfg);
      oo.refine = refine_options(cfg);
      return to_json(omega_for_energy(L, cfg.energy, cfg.h0, c0, oo));
    });
    const OmegaResult w = omega_result_of(om);
    summary["omega"] = to_json(w.omega.w);
    summary["lambda0"] = num(w.lambda0);
    summary["validation_gap"] = num(w.validation_gap);

    const json pj = run.stage("proxy", [&] {
      ProxyOptions po;
      po.starts = cfg.solver.proxy_starts;
      po.seed = task_seed(cfg.seed, 2);
      po.beta = beta_options(cfg);
      po.refine = refine_options(cfg);
      return to_json(mather_set_proxy(L, w, po));
    });
    const MatherSetProxy px = proxy_of(pj);
    summary["proxy_status"] = px.status;
    summary["proxy_count"] = px.count();

    const json bar = run.stage("barrier", [&] {
      std::vector<Vec2> pts;
      auto take = [&](const DiscreteLoop& l) {
        const int n = std::max(1, cfg.barrier.orbit_points);
        for (int k = 0; k < n; ++k) pts.push_back(wrap(l.node(std::int64_t(k) * l.size() / n)).x);
      };
      for (const auto& m : px.members) take(m.loop);
      if (px.family) take(*px.family);
      const auto grid = geometric_grid(cfg.barrier.t_min, cfg.barrier.t_max, cfg.barrier.t_points);
      const auto samples = parallel_map<json>(pts.size(), [&](std::size_t i) {
        return to_json(peierls_barrier(L, {pts[i]}, {pts[i]}, w.omega, w.alpha, grid));
      });
      json res = json::array();
      for (const auto& m : px.members) {
        const int k = int(std::ceil(1.0 / m.orbit.period));
        const auto seg = integrate_lifted(L, m.orbit.seed, k * m.orbit.period, cfg.solver.dt);
        res.push_back(num(semistatic_residual(L, seg, w.omega, w.alpha)));
      }
      return json{{"samples", samples}, {"semistatic", res}};
    });
    {
      std::ostringstream os;
      bool header = true;
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& s : bar.at("samples")) {
        const BarrierSample b = barrier_of(s);
        write_barrier_csv(os, b, header);
        header = false;
        worst = std::max(worst, b.running_min);
      }
      if (header) os << "x1,x2,y1,y2,t,phi_plus_alpha_t,running_min\n";
      run.emit("barrier.csv", os.str());
      summary["barrier_max_diagonal"] = num(worst);
      summary["semistatic_residuals"] = bar.at("semistatic");
    }

    const json cls = run.stage("classify", [&] {
      json orbits = json::array(), failures = json::array();
      bool c1 = !px.members.empty(), hyperbolic = c1;
      for (std::size_t i = 0; i < px.members.size(); ++i) {
        const auto st = px.members[i].orbit.floquet.stability;
        orbits.push_back(to_string(st));
        if (st != Stability::Hyperbolic) hyperbolic = false;
        if (st != Stability::Hyperbolic && st != Stability::Elliptic) {
          c1 = false;
          failures.push_back(fmt::format("orbit {} is {}", i, to_string(st)));
        }
      }
      if (px.family) failures.push_back("minimizers form a non-isolated family; its closed orbits are degenerate");
      return json{{"c1", c1}, {"all_hyperbolic", hyperbolic}, {"stability", orbits}, {"failures", failures}};
    });
    hyp["c1"] = cls;
    run.emit("orbits.json", json{{"omega_search", om}, {"proxy", pj}, {"classification", cls}}.dump(2) + "\n");

    json graph = nullptr;
    if (!cls.at("all_hyperbolic").get<bool>()) {
      run.skip("graph", "hypothesis-failed", "the proxy orbits are not all hyperbolic");
      hyp["c2"] = {{"checked", false}};
    } else {
      graph = run.stage("graph", [&] {
        GraphOptions go;
        go.manifold = cfg.manifold;
        std::vector<PeriodicOrbit> orbits;
        for (const auto& m : px.members) orbits.push_back(m.orbit);
        const auto base = build_connection_graph(L, orbits, go);
        json out = {{"base", to_json(base)}, {"cover", nullptr}};
        std::string csv = "graph,node,branch,sign,s,p,age\n" + manifold_csv("base", base);
        auto cycle = shortest_cycle(base);
        std::string where = "base";
        std::size_t tangential = base.tangential.size();
        if (base.nodes.size() == 1 && !cycle) {
          const auto cover = double_cover_graph(L, orbits.front(), go);
          out["cover"] = to_json(cover);
          csv += manifold_csv("cover", cover);
          cycle = shortest_cycle(cover);
          where = "cover";
          tangential += cover.tangential.size();
        }
        out["manifolds_csv"] = csv;
        out["cycle"] = cycle ? json{{"graph", where}, {"cycle", to_json(*cycle)}} : json(nullptr);
        // near-tangent crossings at folds of long curves are always present in a tangle, so (c2) is
        // judged on the crossings a cycle uses; without a cycle any suspect counts against it
        out["c2"] = {{"checked", true},
                     {"holds", cycle ? true : tangential == 0},
                     {"judged_on", cycle ? "cycle" : "all-crossings"},
                     {"tangential", tangential}};
        return out;
      });
      run.emit("graph.json", json{{"base", graph.at("base")}, {"cover", graph.at("cover")}, {"cycle", graph.at("cycle")}}
                                     .dump(2) + "\n");
      run.emit("manifolds.csv", graph.at("manifolds_csv").get<std::string>());
      hyp["c2"] = graph.at("c2");
      const bool cycle = !graph.at("cycle").is_null();
      certificate = cycle && cls.at("c1").get<bool>() && graph.at("c2").at("holds").get<bool>();
      summary["transverse_cycle"] = cycle;
      if (cycle && !certificate) summary["certificate_note"] = "a transverse cycle exists but (c2) does not hold";
    }

    const json ent = run.stage("entropy", [&] {
      json out = {{"covering", to_json(covering_entropy(L, cfg.energy, covering_options(cfg)))},
                  {"lyapunov", to_json(lyapunov_exponent(L, cfg.energy, lyapunov_options(cfg)))},
                  {"horseshoe", nullptr}};
      if (!graph.is_null() && !graph.at("cycle").is_null()) {
        const std::string where = graph.at("cycle").at("graph").get<std::string>();
        auto h = horseshoe_bound(graph_of(graph.at(where)), cfg.energy);
        h.certificate = certificate;
        out["horseshoe"] = to_json(h);
      }
      return out;
    });
    run.emit("entropy.json", ent.dump(2) + "\n");
    {
      std::ostringstream cov, lyap;
      write_covering_csv(cov, entropy_of(ent.at("covering")));
      write_lyapunov_csv(lyap, entropy_of(ent.at("lyapunov")));
      run.emit("covering.csv", cov.str());
      run.emit("lyapunov.csv", lyap.str());
    }
    summary["entropy"] = {{"covering", ent.at("covering").at("estimate")},
                          {"lyapunov", ent.at("lyapunov").at("estimate")},
                          {"horseshoe", ent.at("horseshoe").is_null() ? json(nullptr) : ent.at("horseshoe").at("estimate")}};
  } catch (const StageFailure& f) {
    code = f.exit_code;
  }
  PipelineResult r{code, certificate, run.stages(), {}};
  r.manifest = run.finish(code, certificate, hyp, summary);
  return r;
}

namespace {

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return exit_for(e);
  }
}

}  // namespace

int run_validate(const ExperimentConfig& cfg, const RunOptions& opt) {
  set_workers(opt.workers);
  try {
    const auto rep = validate_tonelli(cfg.make_lagrangian());
    write_atomic((fs::path(opt.out) / "validation.json").string(),
                 json{{"tonelli", true}, {"report", to_json(rep)}}.dump(2) + "\n");
    return kExitOk;
  } catch (const Error& e) {
    write_atomic((fs::path(opt.out) / "validation.json").string(),
                 json{{"tonelli", false}, {"error", e.what()}}.dump(2) + "\n");
    fmt::print(stderr, "{}\n", e.what());
    return exit_for(e);
  }
}

int run_beta(const ExperimentConfig& cfg, const RunOptions& opt) {
  set_workers(opt.workers);
  return guarded([&] {
    std::ostringstream os;
    write_beta_csv(os, beta_grid(cfg.make_lagrangian(), rational_grid(cfg.grid), beta_options(cfg)));
    write_atomic((fs::path(opt.out) / "beta.csv").string(), os.str());
    return int(kExitOk);
  });
}

int run_alpha(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Vec2>& extra) {
  set_workers(opt.workers);
  return guarded([&] {
    const auto L = cfg.make_lagrangian();
    const BetaOptions bo = beta_options(cfg);
    const auto bs = beta_grid(L, rational_grid(cfg.grid), bo);
    auto cv = critical_value(L, bs, bo);
    for (const auto& w : extra) cv.alphas.push_back(alpha_at(L, {w}, bs, bo));
    std::ostringstream os;
    write_alpha_csv(os, cv.alphas);
    write_atomic((fs::path(opt.out) / "alpha.csv").string(), os.str());
    return int(kExitOk);
  });
}

int run_entropy(const ExperimentConfig& cfg, const RunOptions& opt) {
  set_workers(opt.workers);
  return guarded([&] {
    const auto L = cfg.make_lagrangian();
    const json out = {{"covering", to_json(covering_entropy(L, cfg.energy, covering_options(cfg)))},
                      {"lyapunov", to_json(lyapunov_exponent(L, cfg.energy, lyapunov_options(cfg)))}};
    write_atomic((fs::path(opt.out) / "entropy.json").string(), out.dump(2) + "\n");
    return int(kExitOk);
  });
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& path, const std::vector<json>& values,
                                const RunOptions& opt) {
  if (values.empty()) throw ConfigError("values", "empty value list");
  std::vector<SweepRow> rows;
  std::string csv = "value,exit_code,c0,certificate,covering,lyapunov,horseshoe\n";
  const auto field = [](const json& j, const char* k) {
    return j.contains(k) ? num_of(j.at(k)) : std::numeric_limits<double>::quiet_NaN();
  };
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepRow row;
    row.value = values[i].dump();
    row.c0 = row.covering = row.lyapunov = row.horseshoe = std::numeric_limits<double>::quiet_NaN();
    try {
      ExperimentConfig c = config_from_json(with_value(base.canonical, path, values[i]));
      c.seed = base.seed;
      RunOptions o = opt;
      o.out = (fs::path(opt.out) / fmt::format("value_{}", i)).string();
      const auto r = run_pipeline(c, o);
      row.exit_code = r.exit_code;
      row.certificate = r.certificate;
      const json& s = r.manifest.at("summary");
      row.c0 = field(s, "c0");
      if (s.contains("entropy")) {
        row.covering = field(s.at("entropy"), "covering");
        row.lyapunov = field(s.at("entropy"), "lyapunov");
        row.horseshoe = field(s.at("entropy"), "horseshoe");
      }
    } catch (const ConfigError& e) {
      fmt::print(stderr, "sweep value {}: {}\n", row.value, e.what());
      row.exit_code = kExitConfig;
    }
    csv += fmt::format("{},{},{},{},{},{},{}\n", row.value, row.exit_code, row.c0, row.certificate ? 1 : 0,
                       row.covering, row.lyapunov, row.horseshoe);
    rows.push_back(row);
  }
  write_atomic((fs::path(opt.out) / "summary.csv").string(), csv);
  return rows;
}

}  // namespace amlab
