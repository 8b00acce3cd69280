// Acceptance criteria 1-7, one line each.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "amlab/entropy.hpp"
#include "amlab/graph.hpp"
#include "amlab/parallel.hpp"
#include "amlab/pipeline.hpp"
#include "amlab/serialize.hpp"
#include "fixtures.hpp"

using namespace amlab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> failed;
  std::vector<std::string> facts;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failed.push_back(what);
    }
  }
  void fact(const std::string& s) { facts.push_back(s); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path g_out;

// shared between criteria 3, 4 and 5
struct MechanicalRun {
  double eps = 0.0;
  CriticalValue cv;
  std::optional<OmegaResult> w;
  MatherSetProxy px;
};
std::map<double, MechanicalRun> g_mech;

const MechanicalRun& mechanical(double eps) {
  auto it = g_mech.find(eps);
  if (it != g_mech.end()) return it->second;
  const auto L = TonelliLagrangian::standard_mechanical(eps);
  MechanicalRun r;
  r.eps = eps;
  r.cv = critical_value(L);
  r.w.emplace(omega_for_energy(L, 0.5, {0, 1}, r.cv.c0));
  r.px = mather_set_proxy(L, *r.w);
  return g_mech.emplace(eps, std::move(r)).first->second;
}

Outcome flat_suite() {
  Outcome o;
  const auto L = TonelliLagrangian::flat();
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int s = 0; s < 8; ++s) {
    const Vec2 x0 = fixtures::random_vec(rng, 0.0, 1.0), v0 = fixtures::random_vec(rng, -2.0, 2.0);
    const auto tr = integrate(L, {{x0}, v0}, 10.0, 1e-3);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      worst = std::max(worst, (tr.lifts[i].x - (x0 + tr.times[i] * v0)).norm());
      worst = std::max(worst, (tr.states[i].v - v0).norm());
    }
  }
  o.check(worst <= 1e-8, "flow");
  o.fact(fmt::format("flow err {:.1e}", worst));

  const auto grid = rational_grid();
  double beta_err = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    const auto b = beta_at(L, grid[i * grid.size() / 16]);
    beta_err = std::max(beta_err, std::abs(b.beta - 0.5 * b.h.value().h.squaredNorm()));
  }
  o.check(beta_err <= 1e-3, "beta");
  o.fact(fmt::format("beta err {:.1e}", beta_err));

  const double c0 = critical_value(L).c0;
  o.check(std::abs(c0) <= 1e-3, "c0");
  o.fact(fmt::format("c0 {:.1e}", c0 + 0.0));

  const auto orbit = refine_orbit(L, DiscreteLoop::straight(Vec2(0.2, 0.0), {0, 1}, 1.0, 32));
  o.check(orbit.floquet.stability == Stability::Degenerate, "classification");
  o.fact(std::string("vertical geodesic ") + to_string(orbit.floquet.stability));

  const auto cov = covering_entropy(L, 0.5);
  o.check(cov.estimate <= 0.05, "covering slope");
  o.fact(fmt::format("covering slope {:.4f}", cov.estimate));
  return o;
}

Outcome duality_suite() {
  Outcome o;
  double rt = 0.0, en = 0.0, gap_min = 1e300, gap_at = 0.0;
  for (const auto& L : {fixtures::rich_custom(), fixtures::magnetic_demo(), TonelliLagrangian::standard_mechanical(0.05)}) {
    std::mt19937_64 rng(5);
    for (int s = 0; s < 1000; ++s) {
      const TangentState st{{fixtures::random_vec(rng, 0.0, 1.0)}, fixtures::random_vec(rng, -4.0, 4.0)};
      const CotangentState c = legendre(L, st);
      rt = std::max(rt, (inverse_legendre(L, c).v - st.v).norm());
      en = std::max(en, std::abs(energy(L, st) - hamiltonian(L, c)));
    }
    for (int s = 0; s < 10000; ++s) {
      const Vec2 x = fixtures::random_vec(rng, 0.0, 1.0);
      const Vec2 p = fixtures::random_vec(rng, -4.0, 4.0), v = fixtures::random_vec(rng, -4.0, 4.0);
      const double h = hamiltonian(L, {{x}, p});
      gap_min = std::min(gap_min, h + L.value(x, v) - p.dot(v));
      const Vec2 w = inverse_legendre_v(L, x, p);
      gap_at = std::max(gap_at, std::abs(h + L.value(x, w) - p.dot(w)));
    }
  }
  o.check(rt <= 1e-10, "round trip");
  o.check(en <= 1e-10, "energy identity");
  o.check(gap_min >= -1e-12, "fenchel sign");
  o.check(gap_at <= 1e-9, "fenchel equality");
  o.fact(fmt::format("round trip {:.1e}, energy {:.1e}, min gap {:.1e}, gap at transform {:.1e}", rt, en, gap_min,
                     gap_at));
  return o;
}

Outcome mechanical_suite() {
  Outcome o;
  for (double eps : {0.01, 0.05}) {
    const auto L = TonelliLagrangian::standard_mechanical(eps);
    double umax = -1e300;
    for (int i = 0; i < 400; ++i)
      for (int j = 0; j < 400; ++j) umax = std::max(umax, -L.value(Vec2(i / 400.0, j / 400.0), Vec2::Zero()));
    const auto& r = mechanical(eps);
    o.check(std::abs(r.cv.c0 - umax) <= 1e-3 && std::abs(r.cv.c0 - 2 * eps) <= 1e-3, fmt::format("c0 eps={}", eps));
    // the flat answer is lambda = 1; a potential of sup-norm u moves the level speed inside this band
    const double lo = std::sqrt(2 * (0.5 - umax)), hi = std::sqrt(2 * (0.5 + umax));
    o.check(r.w->lambda0 >= lo && r.w->lambda0 <= hi, fmt::format("lambda0 eps={}", eps));
    o.check(r.w->validation_gap <= 1e-3, fmt::format("alpha gap eps={}", eps));
    o.check(!r.px.members.empty(), fmt::format("proxy eps={}", eps));
    double de = 0.0, rot = 0.0;
    for (const auto& m : r.px.members) {
      de = std::max(de, std::abs(energy(L, m.orbit.seed.x, m.orbit.seed.v) - 0.5));
      rot = std::max(rot, m.rotation_residual);
    }
    o.check(de <= 1e-4, fmt::format("proxy energy eps={}", eps));
    o.check(rot < 1e-6, fmt::format("rotation eps={}", eps));
    o.fact(fmt::format("eps={}: c0 {:.6f} lambda0 {:.4f} in [{:.4f},{:.4f}] gap {:.1e} dE {:.1e} rot {:.1e}", eps,
                       r.cv.c0, r.w->lambda0, lo, hi, r.w->validation_gap, de, rot));
  }
  return o;
}

Outcome structure_suite() {
  Outcome o;
  std::vector<PeriodicOrbit> orbits;
  for (double eps : {0.01, 0.05})
    for (const auto& m : mechanical(eps).px.members) orbits.push_back(m.orbit);
  orbits.push_back(refine_orbit(TonelliLagrangian::flat(), DiscreteLoop::straight(Vec2(0.2, 0.0), {0, 1}, 1.0, 32)));
  const auto coupled =
      TonelliLagrangian::mechanical(FourierSeries({{1, 0, 1, 0}, {0, 1, 1, 0}, {1, 1, 0.2, 0}}, 0.05));
  RefineOptions ro;
  ro.energy = 0.5;
  orbits.push_back(refine_orbit(coupled, DiscreteLoop::straight(Vec2::Zero(), {0, 1}, 1.0, 64), ro));
  double det = 0.0, prod = 0.0;
  for (const auto& orb : orbits) {
    det = std::max(det, std::abs(orb.monodromy.determinant() - 1.0));
    prod = std::max(prod, std::abs(std::abs(orb.floquet.lambda[0] * orb.floquet.lambda[1]) - 1.0));
  }
  o.check(det <= 1e-6, "monodromy det");
  o.check(prod <= 1e-6, "floquet product");

  const auto& hyp = mechanical(0.05).px.members.front().orbit;
  o.check(hyp.floquet.stability == Stability::Hyperbolic, "hyperbolic orbit");
  const double mult = std::max(std::abs(hyp.floquet.lambda[0]), std::abs(hyp.floquet.lambda[1]));
  const double oracle = std::log(mult) / hyp.period;
  LyapunovOptions lo;
  lo.t_total = 10 * hyp.period;
  lo.renorm_dt = hyp.period / 4;
  lo.dt = 1e-3;
  const double lyap = lyapunov_from(TonelliLagrangian::standard_mechanical(0.05), hyp.seed, Vec4(1.0, 0.3, -0.2, 0.5), lo)
                          .exponent;
  const double rel = std::abs(lyap - oracle) / oracle;
  o.check(rel <= 0.05, "lyapunov");

  double fd_err = 0.0;
  for (const auto& L : {TonelliLagrangian::standard_mechanical(0.05), fixtures::rich_custom(), coupled}) {
    const TangentState s0{{Vec2(0.15, 0.4)}, Vec2(0.3, 1.0)};
    const double T = 3.0, dt = 1e-3, h = 1e-6;
    const auto res = integrate_variational(L, s0, T, dt);
    for (int c = 0; c < 4; ++c) {
      Vec4 e = Vec4::Zero();
      e(c) = h;
      const Vec4 base = PhasePoint{s0.point.x, s0.v}.as_vec();
      const Vec4 fd = (propagate(L, PhasePoint::from_vec(base + e), T, dt).as_vec() -
                       propagate(L, PhasePoint::from_vec(base - e), T, dt).as_vec()) /
                      (2 * h);
      fd_err = std::max(fd_err, (fd - res.frame.col(c)).norm() / res.frame.col(c).norm());
    }
  }
  o.check(fd_err <= 1e-4, "variational frame");
  o.fact(fmt::format("{} orbits: det {:.1e} product {:.1e}; lyapunov {:.5f} vs {:.5f} ({:.1e} rel); frame {:.1e}",
                     orbits.size(), det, prod, lyap, oracle, rel, fd_err));
  return o;
}

Outcome barrier_suite() {
  Outcome o;
  const auto L = TonelliLagrangian::standard_mechanical(0.05);
  const auto& r = mechanical(0.05);
  const auto grid = geometric_grid(5.0, 40.0, 8);
  double diag = 0.0;
  for (const auto& m : r.px.members)
    for (int k = 0; k < 4; ++k) {
      const TorusPoint x = wrap(m.loop.node(std::int64_t(k) * m.loop.size() / 4));
      diag = std::max(diag, peierls_barrier(L, x, x, r.w->omega, r.w->alpha, grid).running_min);
    }
  o.check(!r.px.members.empty() && diag <= 1e-3, "h(x,x)");

  std::mt19937_64 rng(17);
  const int n = 8;
  std::vector<TorusPoint> pool;
  for (int i = 0; i < n; ++i) pool.push_back({fixtures::random_vec(rng, 0.0, 1.0)});
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) pairs.push_back({i, j});
  const auto hv = parallel_map<double>(pairs.size(), [&](std::size_t k) {
    return peierls_barrier(L, pool[std::size_t(pairs[k].first)], pool[std::size_t(pairs[k].second)], r.w->omega,
                           r.w->alpha, grid)
        .running_min;
  });
  std::vector<std::vector<double>> h(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < pairs.size(); ++k) h[std::size_t(pairs[k].first)][std::size_t(pairs[k].second)] = hv[k];
  auto delta = [&](int i, int j) { return i == j ? 0.0 : h[std::size_t(i)][std::size_t(j)] + h[std::size_t(j)][std::size_t(i)]; };
  double asym = 0.0, neg = 0.0, tri = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      asym = std::max(asym, std::abs(delta(i, j) - delta(j, i)));
      neg = std::min(neg, delta(i, j));
    }
  int triples = 0;
  for (int i = 0; i < n && triples < 50; ++i)
    for (int j = i + 1; j < n && triples < 50; ++j)
      for (int k = j + 1; k < n && triples < 50; ++k) {
        ++triples;
        tri = std::max({tri, delta(i, k) - delta(i, j) - delta(j, k), delta(i, j) - delta(i, k) - delta(k, j),
                        delta(j, k) - delta(j, i) - delta(i, k)});
      }
  o.check(asym <= 1e-12, "symmetry");
  o.check(neg >= -2e-3, "nonnegative");
  o.check(triples == 50 && tri <= 4e-3, "triangle");

  double semi = 0.0;
  for (const auto& m : r.px.members) {
    const int periods = int(std::ceil(1.0 / m.orbit.period));
    const auto seg = integrate_lifted(L, m.orbit.seed, periods * m.orbit.period, 1e-3);
    semi = std::max(semi, std::abs(semistatic_residual(L, seg, r.w->omega, r.w->alpha)));
  }
  o.check(semi <= 1e-4, "semistatic");
  o.fact(fmt::format("h(x,x) <= {:.1e}; delta asym {:.1e}, min {:.1e}, triangle excess {:.1e} on {} triples; "
                     "semistatic {:.1e}",
                     diag, asym, neg, tri, triples, semi));
  return o;
}

std::optional<PipelineResult> g_run1;

Outcome pipeline_smoke() {
  Outcome o;
  const auto cfg = load_config(std::string(AMLAB_CONFIGS) + "/mechanical.json");
  const auto r = run_pipeline(cfg, {(g_out / "workers1").string(), false, 1});
  g_run1 = r;
  const json& m = r.manifest;
  const json& s = m.at("summary");
  o.check(r.exit_code == 0, "exit code");
  o.check(std::abs(s.at("c0").get<double>() - 0.1) <= 1e-3 && cfg.energy > s.at("c0").get<double>(), "c > c0");
  o.check(m.at("hypotheses").at("c1").at("all_hyperbolic") == true, "(c1)");
  std::size_t crossings = 0;
  const json g = json::parse(slurp(g_out / "workers1" / "graph.json"));
  if (!g.at("cover").is_null())
    for (const auto& e : g.at("cover").at("edges")) crossings += e.at("crossings").size();
  o.check(crossings >= 1, "transverse crossing on the cover");
  o.check(r.certificate, "certificate");
  const json& e = s.at("entropy");
  const double cov = e.at("covering").is_null() ? 0.0 : e.at("covering").get<double>();
  const double lyap = e.at("lyapunov").is_null() ? 0.0 : e.at("lyapunov").get<double>();
  const double hs = e.at("horseshoe").is_null() ? 0.0 : e.at("horseshoe").get<double>();
  o.check(cov > 0 && lyap > 0 && hs > 0, "positive estimates");
  o.check(hs > 0 && lyap >= 0.2 * hs, "lyapunov band");
  o.fact(fmt::format("c0 {:.4f}; (c1) {}; cover crossings {} (tangential {}); certificate {}; covering {:.4f}, "
                     "lyapunov {:.4f}, horseshoe {}",
                     s.at("c0").get<double>(), m.at("hypotheses").at("c1").at("c1").dump(), crossings,
                     m.at("hypotheses").contains("c2") ? m.at("hypotheses").at("c2").value("tangential", 0) : 0,
                     r.certificate ? "set" : "unset", cov, lyap, e.at("horseshoe").dump()));
  return o;
}

std::string coupled_note() {
  const auto cfg = load_config(std::string(AMLAB_CONFIGS) + "/coupled.json");
  const auto r = run_pipeline(cfg, {(g_out / "coupled").string(), false, 1});
  const json& e = r.manifest.at("summary").at("entropy");
  return fmt::format("coupled variant (extra 0.2 cos 2pi(x1+x2) term): certificate {}, covering {}, lyapunov {}, "
                     "horseshoe {}",
                     r.certificate ? "set" : "unset", e.at("covering").dump(), e.at("lyapunov").dump(),
                     e.at("horseshoe").dump());
}

Outcome determinism() {
  Outcome o;
  const auto cfg = load_config(std::string(AMLAB_CONFIGS) + "/mechanical.json");
  if (!g_run1) g_run1 = run_pipeline(cfg, {(g_out / "workers1").string(), false, 1});
  const auto r8 = run_pipeline(cfg, {(g_out / "workers8").string(), false, 8});
  set_workers(1);
  int compared = 0;
  std::vector<std::string> diff;
  for (const auto& f : g_run1->manifest.at("files")) {
    const std::string name = f.get<std::string>();
    if (name == "run.json") continue;
    ++compared;
    if (slurp(g_out / "workers1" / name) != slurp(g_out / "workers8" / name)) diff.push_back(name);
  }
  o.check(g_run1->manifest.at("files") == r8.manifest.at("files"), "file index");
  o.check(diff.empty(), "byte-identical");
  o.fact(fmt::format("{} artifacts compared, {} differ{}", compared, diff.size(),
                     diff.empty() ? "" : " (" + fmt::format("{}", fmt::join(diff, ", ")) + ")"));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, known_red;
  std::string out = (fs::temp_directory_path() / "amlab_acceptance").string();
  app.add_option("--only", only, "criteria to run");
  app.add_option("--known-red", known_red, "criteria recorded as unattainable; their failure does not fail the run");
  app.add_option("--out", out, "scratch directory for pipeline runs");
  CLI11_PARSE(app, argc, argv);
  g_out = out;
  fs::remove_all(g_out);
  fs::create_directories(g_out);
  set_workers(1);

  struct Criterion {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> run;
  };
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> all = {
      {1, "flat-torus golden suite", 60.0, flat_suite},
      {2, "duality suite", 60.0, duality_suite},
      {3, "mechanical-family suite", 300.0, mechanical_suite},
      {4, "symplectic/structure suite", none, structure_suite},
      {5, "barrier suite", none, barrier_suite},
      {6, "theorem-pipeline smoke", 1800.0, pipeline_smoke},
      {7, "determinism", none, determinism},
  };
  const std::set<int> sel(only.begin(), only.end()), red(known_red.begin(), known_red.end());
  bool ok = true;
  for (const auto& c : all) {
    if (!sel.empty() && !sel.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome res;
    try {
      res = c.run();
    } catch (const std::exception& e) {
      res.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.check(secs < c.budget, fmt::format("runtime {:.0f}s over {:.0f}s", secs, c.budget));
    std::string line = fmt::format("criterion {}: {} | {} | {:.1f}s | {}", c.id, res.pass ? "PASS" : "FAIL", c.name,
                                   secs, fmt::join(res.facts, "; "));
    if (!res.pass) line += fmt::format(" | failed: {}", fmt::join(res.failed, ", "));
    if (!res.pass && red.count(c.id)) line += " | known red, see notes";
    fmt::print("{}\n", line);
    if (c.id == 6) {
      try {
        fmt::print("  note: {}\n", coupled_note());
      } catch (const std::exception& e) {
        fmt::print("  note: coupled variant threw: {}\n", e.what());
      }
    }
    std::fflush(stdout);
    if (!res.pass && !red.count(c.id)) ok = false;
  }
  return ok ? 0 : 1;
}
