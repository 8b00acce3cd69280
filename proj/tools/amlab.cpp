#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "amlab/pipeline.hpp"
#include "amlab/serialize.hpp"

using namespace amlab;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int workers = 1;
  bool resume = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "override the config seed");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 256));
  app->add_flag("--resume", c.resume, "reuse cached stage outputs");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_config(c.config);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.canonical["seed"] = *c.seed;
  }
  return cfg;
}

RunOptions options(const Common& c) { return {c.out, c.resume, c.workers}; }

std::vector<json> parse_values(const std::string& text) {
  std::vector<json> out;
  if (text.empty()) return out;
  json arr;
  try {
    arr = json::parse(text.front() == '[' ? text : "[" + text + "]");
  } catch (const json::parse_error& e) {
    throw ConfigError("values", e.what());
  }
  for (auto& v : arr) out.push_back(v);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Aubry-Mather laboratory for Tonelli Lagrangians on the two-torus"};
  app.require_subcommand(1);
  Common common;
  auto* validate = app.add_subcommand("validate", "check the Tonelli conditions");
  auto* pipeline = app.add_subcommand("pipeline", "run the full pipeline");
  auto* sweep = app.add_subcommand("sweep", "run the pipeline over parameter values");
  auto* beta = app.add_subcommand("beta", "beta over the rational grid");
  auto* alpha = app.add_subcommand("alpha", "alpha over a cohomology grid");
  auto* entropy = app.add_subcommand("entropy", "covering and Lyapunov entropy estimates");
  for (auto* s : {validate, pipeline, sweep, beta, alpha, entropy}) add_common(s, common);
  std::string param, values;
  sweep->add_option("--param", param, "dotted config path, e.g. lagrangian.a1")->required();
  sweep->add_option("--values", values, "comma-separated JSON values");
  std::vector<double> omega;
  alpha->add_option("--omega", omega, "extra classes as w1 w2 pairs")->expected(0, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const ExperimentConfig cfg = load(common);
    const RunOptions opt = options(common);
    if (*validate) return run_validate(cfg, opt);
    if (*beta) return run_beta(cfg, opt);
    if (*entropy) return run_entropy(cfg, opt);
    if (*alpha) {
      if (omega.size() % 2 != 0) throw ConfigError("omega", "expects pairs of numbers");
      std::vector<Vec2> extra;
      for (std::size_t i = 0; i < omega.size(); i += 2) extra.emplace_back(omega[i], omega[i + 1]);
      return run_alpha(cfg, opt, extra);
    }
    if (*sweep) {
      const auto rows = run_sweep(cfg, param, parse_values(values), opt);
      for (const auto& r : rows)
        fmt::print("{} exit={} c0={:.6f} certificate={}\n", r.value, r.exit_code, r.c0, r.certificate);
      return kExitOk;
    }
    const auto r = run_pipeline(cfg, opt);
    for (const auto& s : r.stages)
      fmt::print("{:<15} {:<18} {:>8.2f}s{}{}\n", s.name, s.status, s.seconds, s.cache_hit ? " cache-hit" : "",
                 s.detail.empty() ? "" : "  " + s.detail);
    if (r.manifest.at("summary").contains("c0"))
      fmt::print("c0 = {}\n", r.manifest.at("summary").at("c0").dump());
    fmt::print("certificate: {}\n", r.certificate ? "set" : "unset");
    return r.exit_code;
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitNumerical;
  }
}
