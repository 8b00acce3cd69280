#include "amlab/mather.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>

#include "amlab/parallel.hpp"

namespace amlab {

RationalClass RationalClass::reduced(IntClass p, std::int64_t n) {
  if (n <= 0) throw Error(ErrorKind::InvalidInput, "rational class needs a positive denominator");
  if (p.is_zero()) return {p, 1};
  const std::int64_t g = gcd(gcd(p.k, p.l), n);
  return {{p.k / g, p.l / g}, n / g};
}

namespace {

int nodes_for(double T, const BetaOptions& opt) {
  const double n = std::ceil(opt.nodes_per_time * std::max(1.0, T));
  return int(std::clamp(n, double(opt.min_nodes), double(opt.max_nodes)));
}

// best fixed-period minimizer of class p over several random starts
std::optional<LoopMinimum> best_loop(const TonelliLagrangian& L, IntClass p, const CohomologyClass& omega, double T,
                                     int nodes, int starts, std::uint64_t seed, const BetaOptions& opt) {
  LoopOptions lo;
  lo.nodes = nodes;
  lo.newton = opt.newton;
  const auto runs = parallel_map<std::optional<LoopMinimum>>(std::size_t(starts), [&](std::size_t i) {
    try {
      return std::optional<LoopMinimum>(minimize_loop(L, p, omega, PeriodMode::fixed(T), task_seed(seed, i), lo));
    } catch (const Error&) {
      return std::optional<LoopMinimum>();
    }
  });
  std::optional<LoopMinimum> best;
  for (const auto& r : runs)
    if (r && (!best || r->action < best->action)) best = r;
  return best;
}

LoopMinimum warm_minimum(const TonelliLagrangian& L, const DiscreteLoop& warm, const CohomologyClass& omega,
                         double T, const BetaOptions& opt) {
  LoopOptions lo;
  lo.nodes = warm.size();
  lo.newton = opt.newton;
  return minimize_loop_from(L, warm.with_period(T), omega, lo);
}

// -min over T of the average (L - omega)-action in class p, Brent on log T
double refine_alpha(const TonelliLagrangian& L, const DiscreteLoop& witness, const CohomologyClass& omega,
                    const BetaOptions& opt, DiscreteLoop* best_loop_out) {
  std::map<double, LoopMinimum> cache;
  auto eval = [&](double u) {
    auto it = cache.find(u);
    if (it != cache.end()) return it->second.action / std::exp(u);
    const DiscreteLoop* warm = &witness;
    if (!cache.empty()) {
      auto nb = cache.lower_bound(u);
      if (nb == cache.end() || (nb != cache.begin() && std::abs(std::prev(nb)->first - u) < std::abs(nb->first - u)))
        nb = std::prev(nb);
      warm = &nb->second.loop;
    }
    LoopMinimum m = [&] {
      try {
        return warm_minimum(L, *warm, omega, std::exp(u), opt);
      } catch (const ConvergenceFailure& e) {
        return e.best();
      }
    }();
    const double f = m.action / std::exp(u);
    cache.emplace(u, std::move(m));
    return f;
  };
  const double u0 = std::log(witness.period());
  boost::uintmax_t iters = 60;
  eval(u0);
  boost::math::tools::brent_find_minima(eval, u0 - std::log(2.0), u0 + std::log(2.0), 40, iters);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [u, m] : cache) {
    const double f = m.action / std::exp(u);
    if (f < best) {
      best = f;
      if (best_loop_out) *best_loop_out = m.loop;
    }
  }
  return -best;
}

}  // namespace

BetaSample beta_at(const TonelliLagrangian& L, const RationalClass& hr, const BetaOptions& opt) {
  const RationalClass h = RationalClass::reduced(hr.p, hr.n);
  if (h.p.is_zero()) {
    LoopOptions lo;
    lo.nodes = opt.min_nodes;
    const auto rest = minimize_loop(L, {}, {}, PeriodMode::search(0.5, 2.0), opt.seed, lo);
    BetaSample out{h, rest.action / rest.loop.period(), rest.loop, rest.loop.period(), true};
    // contractible loops can beat rest points when a magnetic term is present
    for (double T : {1.0, 2.0, 4.0}) {
      const auto m = best_loop(L, {}, {}, T, nodes_for(T, opt), opt.starts, task_seed(opt.seed, std::uint64_t(T)), opt);
      if (m && m->action / T < out.beta - 1e-12) {
        out.beta = m->action / T;
        out.witness = m->loop;
        out.witness_period = T;
        out.fixed_point = false;
      }
    }
    return out;
  }
  const double T = double(h.n);
  const auto m = best_loop(L, h.p, {}, T, nodes_for(T, opt), opt.starts, opt.seed, opt);
  if (!m)
    throw Error(ErrorKind::Convergence,
                fmt::format("beta: all {} starts failed for class ({},{})/{}", opt.starts, h.p.k, h.p.l, h.n));
  return {h, m->action / T, m->loop, T, false};
}

std::vector<RationalClass> rational_grid(const GridSpec& spec) {
  std::vector<RationalClass> out;
  for (int n = 1; n <= spec.max_denominator; ++n)
    for (int a = -spec.max_numerator; a <= spec.max_numerator; ++a)
      for (int b = -spec.max_numerator; b <= spec.max_numerator; ++b) {
        const auto r = RationalClass::reduced({a, b}, n);
        if (r.value().h.norm() > spec.max_norm + 1e-12) continue;
        const bool seen = std::any_of(out.begin(), out.end(),
                                      [&](const RationalClass& q) { return q.p == r.p && q.n == r.n; });
        if (!seen) out.push_back(r);
      }
  return out;
}

std::vector<BetaSample> beta_grid(const TonelliLagrangian& L, const std::vector<RationalClass>& grid,
                                  const BetaOptions& opt) {
  const auto res = parallel_map<std::optional<BetaSample>>(grid.size(), [&](std::size_t i) {
    BetaOptions o = opt;
    o.seed = task_seed(opt.seed, i);
    return std::optional<BetaSample>(beta_at(L, grid[i], o));
  });
  std::vector<BetaSample> out;
  out.reserve(res.size());
  for (const auto& r : res) out.push_back(*r);
  return out;
}

AlphaSample alpha_at(const TonelliLagrangian& L, const CohomologyClass& omega, const std::vector<BetaSample>& samples,
                     const BetaOptions& opt) {
  if (samples.empty()) throw Error(ErrorKind::InsufficientData, "alpha: no beta samples");
  std::size_t arg = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double v = pairing(omega, samples[i].h.value()) - samples[i].beta;
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  const auto& s = samples[arg];
  AlphaSample a{omega, best, best, s.witness, s.h};
  if (s.h.p.is_zero()) return a;
  DiscreteLoop loop = s.witness;
  const double refined = refine_alpha(L, s.witness, omega, opt, &loop);
  if (refined > a.alpha) {
    a.alpha = refined;
    a.witness = loop;
  }
  return a;
}

double fenchel_violation(const AlphaSample& a, const std::vector<BetaSample>& samples) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) worst = std::max(worst, pairing(a.omega, s.h.value()) - a.alpha - s.beta);
  return worst;
}

CriticalValue critical_value(const TonelliLagrangian& L, const std::vector<BetaSample>& samples,
                             const BetaOptions& opt) {
  auto zero = std::find_if(samples.begin(), samples.end(), [](const BetaSample& s) { return s.h.p.is_zero(); });
  CriticalValue cv;
  cv.c0 = zero != samples.end() ? -zero->beta : -beta_at(L, {}, opt).beta;
  std::vector<CohomologyClass> omegas;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) omegas.push_back({Vec2(-1.0 + 0.5 * i, -1.0 + 0.5 * j)});
  const auto res = parallel_map<std::optional<AlphaSample>>(omegas.size(), [&](std::size_t i) {
    return std::optional<AlphaSample>(alpha_at(L, omegas[i], samples, opt));
  });
  cv.min_alpha = std::numeric_limits<double>::infinity();
  for (const auto& r : res) {
    cv.alphas.push_back(*r);
    cv.min_alpha = std::min(cv.min_alpha, r->alpha);
  }
  const double gap = std::abs(cv.min_alpha - cv.c0);
  if (gap > 1e-2)
    cv.warning = fmt::format("critical value cross-check: -beta(0) = {:.6f} but min alpha = {:.6f}", cv.c0,
                             cv.min_alpha);
  return cv;
}

CriticalValue critical_value(const TonelliLagrangian& L, const BetaOptions& opt) {
  return critical_value(L, beta_grid(L, rational_grid({2, 2, 4.0}), opt), opt);
}

OmegaResult omega_for_energy(const TonelliLagrangian& L, double c, IntClass h0, double c0, const OmegaOptions& opt) {
  if (h0.is_zero()) throw Error(ErrorKind::InvalidInput, "omega search needs a non-zero class h0");
  if (!(c > c0 + opt.margin))
    throw Error(ErrorKind::BelowCritical,
                fmt::format("energy {} is not above the critical value {:.6f} (+{})", c, c0, opt.margin));
  OmegaResult out(LoopMinimum{DiscreteLoop::straight(Vec2::Zero(), h0, 1.0, 8)});
  out.h0 = h0;
  out.energy = c;
  out.g = gcd(std::abs(h0.k), std::abs(h0.l));
  out.k0 = {h0.k / out.g, h0.l / out.g};
  const double g = double(out.g);
  const IntClass k0 = out.k0;
  const BetaOptions& bo = opt.beta;

  // scan E(lambda) for the minimizer of rotation lambda h0 (class k0, period 1/(g lambda))
  std::vector<double> lams(std::size_t(opt.scan_points));
  for (int i = 0; i < opt.scan_points; ++i)
    lams[std::size_t(i)] =
        opt.lambda_lo * std::pow(opt.lambda_hi / opt.lambda_lo, double(i) / (opt.scan_points - 1));
  const auto scan = parallel_map<std::optional<LoopMinimum>>(lams.size(), [&](std::size_t i) {
    const double T = 1.0 / (g * lams[i]);
    return best_loop(L, k0, {}, T, nodes_for(T, bo), bo.starts, task_seed(bo.seed, i), bo);
  });
  for (std::size_t i = 0; i < lams.size(); ++i)
    out.scan.push_back({lams[i], scan[i] ? loop_energy(L, scan[i]->loop) : std::numeric_limits<double>::quiet_NaN()});
  for (std::size_t i = 0; i + 1 < out.scan.size(); ++i) {
    const double a = out.scan[i].energy - c, b = out.scan[i + 1].energy - c;
    if (std::isfinite(a) && std::isfinite(b) && a * b <= 0.0) out.brackets.push_back({lams[i], lams[i + 1]});
  }
  if (out.brackets.empty())
    throw Error(ErrorKind::Bracketing,
                fmt::format("energy {} not bracketed on lambda in [{}, {}]: E ranges over [{:.6g}, {:.6g}]", c,
                            opt.lambda_lo, opt.lambda_hi, out.scan.front().energy, out.scan.back().energy));

  // bisection on the smallest bracket at a fixed resolution
  double la = out.brackets.front().first, lb = out.brackets.front().second;
  const std::size_t ia = std::size_t(std::find(lams.begin(), lams.end(), la) - lams.begin());
  const int nodes = nodes_for(1.0 / (g * la), bo);
  DiscreteLoop warm = resample_loop(scan[ia]->loop, nodes);
  auto solve = [&](double lam) {
    LoopMinimum m = warm_minimum(L, warm, {}, 1.0 / (g * lam), bo);
    warm = m.loop;
    return m;
  };
  LoopMinimum ma = solve(la);
  double ea = loop_energy(L, ma.loop);
  LoopMinimum mb = solve(lb);
  double eb = loop_energy(L, mb.loop);
  out.bisection.push_back({la, ea});
  out.bisection.push_back({lb, eb});
  if ((ea - c) * (eb - c) > 0.0)
    throw Error(ErrorKind::Bracketing, fmt::format("bracket [{}, {}] lost at {} nodes: E = {:.8f}, {:.8f}", la, lb,
                                                   nodes, ea, eb));
  LoopMinimum mid = std::abs(ea - c) < std::abs(eb - c) ? ma : mb;
  double lm = std::abs(ea - c) < std::abs(eb - c) ? la : lb;
  double em = std::abs(ea - c) < std::abs(eb - c) ? ea : eb;
  for (int it = 0; it < 80 && std::abs(em - c) > opt.energy_tol && lb - la > 1e-14 * lb; ++it) {
    lm = 0.5 * (la + lb);
    mid = solve(lm);
    em = loop_energy(L, mid.loop);
    out.bisection.push_back({lm, em});
    if (em < std::min(ea, eb) - 1e-9 || em > std::max(ea, eb) + 1e-9) {
      std::string diag;
      for (const auto& s : out.bisection) diag += fmt::format(" ({:.6f}, {:.8f})", s.lambda, s.energy);
      throw Error(ErrorKind::Bracketing, "energy is not monotone in lambda on the bracket:" + diag);
    }
    if ((em - c) * (ea - c) > 0.0) {
      la = lm;
      ea = em;
    } else {
      lb = lm;
      eb = em;
    }
  }
  out.lambda_discrete = lm;
  out.witness = mid;

  RefineOptions ro = opt.refine;
  ro.energy = c;
  out.orbit = refine_orbit(L, mid.loop, ro);
  out.period = out.orbit.period;
  out.lambda0 = 1.0 / (g * out.period);

  // <omega, k0>: lower secant of beta(lambda h0) in lambda
  const double dl = opt.secant_step * lm;
  warm = mid.loop;
  const double beta_hi = mid.action / mid.loop.period();
  const LoopMinimum lower = solve(lm - dl);
  const double beta_lo = lower.action / lower.loop.period();
  const double along = (beta_hi - beta_lo) / dl / g;

  // <omega, k_perp>: central difference over the classes q k0 +- k_perp
  std::int64_t bx = 0, by = 0;
  ext_gcd(k0.k, k0.l, bx, by);
  const IntClass kp{-by, bx};
  const int q = opt.transverse_q;
  const double Tq = q / (lm * g);
  const double delta = lm * g / q;
  double bpm[2];
  for (int s = 0; s < 2; ++s) {
    const int sg = s == 0 ? 1 : -1;
    const IntClass cls{q * k0.k + sg * kp.k, q * k0.l + sg * kp.l};
    const auto m = best_loop(L, cls, {}, Tq, nodes_for(Tq, bo), bo.starts, task_seed(bo.seed, 1000 + s), bo);
    if (!m) throw Error(ErrorKind::Convergence, "omega search: transverse stencil minimization failed");
    bpm[s] = m->action / Tq;
  }
  const double across = (bpm[0] - bpm[1]) / (2.0 * delta);
  Mat2 A;
  A << double(k0.k), double(k0.l), double(kp.k), double(kp.l);
  out.omega = {A.inverse() * Vec2(along, across)};

  DiscreteLoop best = mid.loop;
  out.alpha = refine_alpha(L, mid.loop, out.omega, bo, &best);
  out.validation_gap = std::abs(out.alpha - c);
  return out;
}

namespace {

double rotation_residual(const TonelliLagrangian& L, const PeriodicOrbit& o) {
  const PhasePoint end = propagate(L, o.seed, o.period, 1e-3);
  return (end.x - o.seed.x - o.homology.as_vec()).norm();
}

}  // namespace

MatherSetProxy mather_set_proxy(const TonelliLagrangian& L, const OmegaResult& w, const ProxyOptions& opt) {
  MatherSetProxy px;
  px.omega = w.omega;
  px.energy = w.energy;
  const double T = w.witness.loop.period();
  const int nodes = w.witness.loop.size();
  LoopOptions lo;
  lo.nodes = nodes;
  lo.newton = opt.beta.newton;
  auto runs = parallel_map<std::optional<LoopMinimum>>(std::size_t(opt.starts), [&](std::size_t i) {
    try {
      return std::optional<LoopMinimum>(
          minimize_loop(L, w.k0, w.omega, PeriodMode::fixed(T), task_seed(opt.seed, i), lo));
    } catch (const Error&) {
      return std::optional<LoopMinimum>();
    }
  });
  // the bisection witness was minimized without omega
  try {
    runs.push_back(minimize_loop_from(L, w.witness.loop, w.omega, lo));
  } catch (const ConvergenceFailure&) {
  }
  std::vector<LoopMinimum> ok;
  for (auto& r : runs)
    if (r) ok.push_back(std::move(*r));
  px.starts_converged = int(std::count_if(runs.begin(), runs.begin() + opt.starts, [](const auto& r) { return bool(r); }));
  double amin = std::numeric_limits<double>::infinity();
  for (const auto& m : ok) amin = std::min(amin, m.action / T);

  // cluster the minimizing loops by image distance
  std::vector<LoopMinimum> reps;
  for (const auto& m : ok) {
    if (m.action / T > amin + opt.action_tol) {
      ++px.dropped_non_minimizing;
      continue;
    }
    const bool known = std::any_of(reps.begin(), reps.end(), [&](const LoopMinimum& r) {
      return loop_distance(r.loop, m.loop) <= opt.cluster_tol;
    });
    if (!known) reps.push_back(m);
  }
  std::sort(reps.begin(), reps.end(), [](const LoopMinimum& a, const LoopMinimum& b) {
    return a.loop.node(0)(0) < b.loop.node(0)(0);
  });

  // a zero second Hessian eigenvalue means a continuum of minimizers
  {
    const auto& r = reps.front();
    const auto p = PathProblem::loop(L, r.loop.size(), T, w.k0, w.omega.w, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.dense_hessian(p.compress(r.loop.nodes())),
                                                      Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    px.hessian_gap = ev(1) / std::max(1.0, ev(ev.size() - 1));
    if (px.hessian_gap <= opt.family_tol) {
      px.status = "non-isolated-family";
      px.family = r.loop;
      px.notes.push_back(fmt::format("second Hessian eigenvalue {:.3e} relative to the largest: minimizers form a "
                                     "continuum", px.hessian_gap));
      return px;
    }
  }

  RefineOptions ro = opt.refine;
  ro.energy = w.energy;
  for (const auto& r : reps) {
    ProxyMember m{refine_orbit(L, r.loop, ro), r.loop, r.action / T, 0.0};
    m.rotation_residual = rotation_residual(L, m.orbit);
    if (std::abs(m.orbit.energy - w.energy) > opt.energy_tol)
      px.notes.push_back(fmt::format("member energy {:.8f} off the level {}", m.orbit.energy, w.energy));
    px.members.push_back(std::move(m));
  }

  // rotation-norm bounds from the bisection samples on the level (within the validation band)
  const double h0n = w.h0.as_vec().norm();
  double k = w.lambda0 * h0n, l = k;
  for (const auto& s : w.bisection)
    if (std::abs(s.energy - w.energy) <= 1e-3) {
      k = std::min(k, s.lambda * h0n);
      l = std::max(l, s.lambda * h0n);
    }
  px.k_bound = k;
  px.l_bound = l;
  const double k0n = w.k0.as_vec().norm();
  for (const auto& m : px.members) {
    const double rho = k0n / m.orbit.period;
    if (!(k > 0.0 && rho >= k * (1 - 1e-9) && rho <= l * (1 + 1e-9))) {
      px.bounds_hold = false;
      px.notes.push_back(fmt::format("|rho| = {:.8f} outside [{:.8f}, {:.8f}]", rho, k, l));
    }
  }
  px.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < px.members.size(); ++i)
    for (std::size_t j = i + 1; j < px.members.size(); ++j)
      px.min_separation = std::min(px.min_separation, loop_distance(px.members[i].loop, px.members[j].loop));
  px.disjoint = px.members.size() < 2 || px.min_separation > 0.0;
  return px;
}

void write_beta_csv(std::ostream& os, const std::vector<BetaSample>& samples) {
  os << "h1,h2,beta,T_witness\n";
  for (const auto& s : samples) {
    const Vec2 h = s.h.value().h;
    os << fmt::format("{},{},{},{}\n", h(0), h(1), s.beta, s.witness_period);
  }
}

void write_alpha_csv(std::ostream& os, const std::vector<AlphaSample>& samples) {
  os << "w1,w2,alpha\n";
  for (const auto& a : samples) os << fmt::format("{},{},{}\n", a.omega.w(0), a.omega.w(1), a.alpha);
}

}  // namespace amlab
