#include "amlab/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include <boost/math/tools/minima.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace amlab {

double discrete_action(const TonelliLagrangian& L, const DiscreteLoop& loop, const CohomologyClass& omega,
                       double k_offset) {
  const auto p = PathProblem::loop(L, loop.size(), loop.period(), loop.homology(), omega.w, k_offset);
  return p.action(p.compress(loop.nodes()));
}

double loop_gradient_norm(const TonelliLagrangian& L, const DiscreteLoop& loop, const CohomologyClass& omega) {
  const auto p = PathProblem::loop(L, loop.size(), loop.period(), loop.homology(), omega.w, 0.0);
  return p.gradient(p.compress(loop.nodes())).lpNorm<Eigen::Infinity>();
}

namespace {

std::vector<Vec2> loop_nodes(const PathProblem& p, const Eigen::VectorXd& z) {
  auto y = p.expand(z);
  y.pop_back();
  return y;
}

// Point minimizing L(x, 0) on the torus: grid scan then Newton polish.
Vec2 best_rest_point(const TonelliLagrangian& L) {
  constexpr int n = 64;
  Vec2 best = Vec2::Zero();
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const Vec2 x(double(i) / n, double(k) / n);
      const double val = L.value(x, Vec2::Zero());
      if (val < best_val) {
        best_val = val;
        best = x;
      }
    }
  for (int it = 0; it < 20; ++it) {
    const Jet j = L.jet(best, Vec2::Zero());
    Eigen::SelfAdjointEigenSolver<Mat2> es(j.Lxx);
    if (es.eigenvalues()(0) <= 0.0) break;
    const Vec2 step = j.Lxx.ldlt().solve(j.Lx);
    if (L.value(best - step, Vec2::Zero()) > L.value(best, Vec2::Zero())) break;
    best -= step;
    if (step.norm() < 1e-14) break;
  }
  return wrap(best).x;
}

}  // namespace

LoopMinimum minimize_loop_from(const TonelliLagrangian& L, const DiscreteLoop& start, const CohomologyClass& omega,
                               const LoopOptions& opt) {
  const auto p = PathProblem::loop(L, start.size(), start.period(), start.homology(), omega.w, opt.k_offset);
  const NewtonResult r = minimize_path(p, p.compress(start.nodes()), opt.newton);
  LoopMinimum out{DiscreteLoop(loop_nodes(p, r.z), start.period(), start.homology())};
  out.action = r.action;
  out.seed_action = r.initial_action;
  out.grad_norm = r.grad_norm;
  out.residual = r.grad_norm / p.step();
  if (!r.converged)
    throw ConvergenceFailure(fmt::format("loop minimization stalled at gradient {:.3e}", r.grad_norm), out);
  return out;
}

LoopMinimum minimize_loop_free_from(const TonelliLagrangian& L, const DiscreteLoop& start,
                                    const CohomologyClass& omega, double t_min, double t_max,
                                    const LoopOptions& opt) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw Error(ErrorKind::InvalidInput, "invalid period search range");
  const double lo = std::log(t_min), hi = std::log(t_max);
  // evaluated loops keyed by log T, reused as warm starts
  std::map<double, LoopMinimum> cache;
  double seed_action = std::numeric_limits<double>::quiet_NaN();
  auto eval = [&](double u) {
    auto it = cache.find(u);
    if (it != cache.end()) return it->second.action;
    std::vector<Vec2> warm = start.nodes();
    if (!cache.empty()) {
      auto nb = cache.lower_bound(u);
      if (nb == cache.end() || (nb != cache.begin() && std::abs(std::prev(nb)->first - u) < std::abs(nb->first - u)))
        nb = std::prev(nb);
      warm = nb->second.loop.nodes();
    }
    const DiscreteLoop init(warm, std::exp(u), start.homology());
    LoopMinimum m = [&] {
      try {
        return minimize_loop_from(L, init, omega, opt);
      } catch (const ConvergenceFailure& e) {
        return e.best();
      }
    }();
    if (std::isnan(seed_action)) seed_action = m.seed_action;
    const double a = m.action;
    cache.emplace(u, std::move(m));
    return a;
  };
  eval(std::clamp(std::log(start.period()), lo, hi));
  boost::uintmax_t max_iter = 80;
  boost::math::tools::brent_find_minima(eval, lo, hi, 30, max_iter);
  auto best = std::min_element(cache.begin(), cache.end(),
                               [](const auto& a, const auto& b) { return a.second.action < b.second.action; });
  LoopMinimum out = best->second;
  out.seed_action = seed_action;
  out.interior = best->first - lo > 1e-3 && hi - best->first > 1e-3;
  if (!(out.grad_norm <= opt.newton.grad_tol))
    throw ConvergenceFailure(fmt::format("free-period minimization stalled at gradient {:.3e}", out.grad_norm), out);
  return out;
}

LoopMinimum minimize_loop(const TonelliLagrangian& L, IntClass homology, const CohomologyClass& omega,
                          const PeriodMode& mode, std::uint64_t seed, const LoopOptions& opt) {
  if (mode.free && homology.is_zero()) {
    // contractible loops with free period collapse onto a rest point
    const Vec2 x = best_rest_point(L);
    const DiscreteLoop c(std::vector<Vec2>(static_cast<std::size_t>(opt.nodes), x), mode.period, homology);
    LoopMinimum out{c};
    out.action = discrete_action(L, c, omega, opt.k_offset);
    out.seed_action = out.action;
    out.grad_norm = loop_gradient_norm(L, c, omega);
    out.residual = out.grad_norm / c.step();
    out.collapsed = true;
    out.interior = false;
    return out;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  const Vec2 x0(unit(rng), unit(rng));
  std::vector<Vec2> nodes(static_cast<std::size_t>(opt.nodes));
  for (int i = 0; i < opt.nodes; ++i) {
    nodes[i] = x0 + (double(i) / opt.nodes) * homology.as_vec();
    nodes[i] += opt.jitter * Vec2(sym(rng), sym(rng));
  }
  const DiscreteLoop start(std::move(nodes), mode.period, homology);
  LoopMinimum out = mode.free ? minimize_loop_free_from(L, start, omega, mode.t_min, mode.t_max, opt)
                              : minimize_loop_from(L, start, omega, opt);
  if (homology.is_zero()) {
    double len = 0.0;
    for (int i = 0; i < out.loop.size(); ++i) len += (out.loop.node(i + 1) - out.loop.node(i)).norm();
    out.collapsed = len < 1e-6;
  }
  return out;
}

double potential_at_resolution(const TonelliLagrangian& L, const Vec2& x, const Vec2& y, double t,
                               const CohomologyClass& omega, int segments, const NewtonOptions& newton,
                               std::vector<Vec2>* path) {
  const auto p = PathProblem::fixed(L, segments, t, x, y, omega.w, 0.0);
  std::vector<Vec2> init(static_cast<std::size_t>(segments + 1));
  for (int i = 0; i <= segments; ++i) init[i] = x + (double(i) / segments) * (y - x);
  const NewtonResult r = minimize_path(p, p.compress(init), newton);
  if (!r.converged)
    throw Error(ErrorKind::Convergence, fmt::format("endpoint minimization stalled at gradient {:.3e}", r.grad_norm));
  if (path) *path = p.expand(r.z);
  return r.action;
}

namespace {

double straight_estimate(const TonelliLagrangian& L, const Vec2& x, const Vec2& y, double t, const Vec2& w) {
  const Vec2 d = y - x;
  // enough nodes per winding that the midpoint rule does not alias with the harmonics
  const int n = 17 + 16 * int(std::ceil(d.cwiseAbs().maxCoeff()));
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += L.value(x + ((k + 0.5) / n) * d, d / t);
  return t * s / n - w.dot(d);
}

}  // namespace

PotentialResult action_potential(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y, double t,
                                 const CohomologyClass& omega, const PotentialOptions& opt) {
  if (!(t > 0.0) || !std::isfinite(t)) throw Error(ErrorKind::InvalidInput, "potential needs t > 0");
  const Vec2 xs = x.x;
  const auto target = [&](const Eigen::Vector2i& m) { return Vec2(y.x + m.cast<double>()); };
  Eigen::Vector2i center(int(std::lround(xs(0) - y.x(0))), int(std::lround(xs(1) - y.x(1))));
  double cval = straight_estimate(L, xs, target(center), t, omega.w);
  // local descent alone stalls at rest points on potential maxima; scan a coarse box first
  const int reach = int(std::ceil(t * (2.0 * omega.w.norm() + 1.0))) + 2;
  const int stride = std::max(1, reach / 6);
  const Eigen::Vector2i origin = center;
  for (int a = -reach; a <= reach; a += stride)
    for (int b = -reach; b <= reach; b += stride) {
      const Eigen::Vector2i m = origin + Eigen::Vector2i(a, b);
      const double v = straight_estimate(L, xs, target(m), t, omega.w);
      if (v < cval - 1e-12) {
        cval = v;
        center = m;
      }
    }
  for (int guard = 0; guard < 100000; ++guard) {
    Eigen::Vector2i best = center;
    double bval = cval;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        const Eigen::Vector2i m = center + Eigen::Vector2i(a, b);
        const double v = straight_estimate(L, xs, target(m), t, omega.w);
        if (v < bval - 1e-12) {
          bval = v;
          best = m;
        }
      }
    if (best == center) break;
    center = best;
    cval = bval;
  }

  const int n = std::max(8, int(std::ceil(t / opt.h0 - 1e-9)));
  PotentialResult res;
  res.segments = n;
  double best = std::numeric_limits<double>::infinity();
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const Vec2 tgt = target(center + Eigen::Vector2i(a, b));
      try {
        const double v = potential_at_resolution(L, xs, tgt, t, omega, n, opt.newton);
        if (v < best) {
          best = v;
          res.target = tgt;
        }
      } catch (const Error&) {
        // a failed start is dropped; all failing is reported below
      }
    }
  if (!std::isfinite(best)) throw Error(ErrorKind::Convergence, "all endpoint translates failed to converge");
  res.coarse = best;
  if (opt.richardson) {
    res.fine = potential_at_resolution(L, xs, res.target, t, omega, 2 * n, opt.newton, &res.path);
    res.value = (4.0 * res.fine - res.coarse) / 3.0;
  } else {
    res.fine = res.coarse;
    res.value = res.coarse;
    potential_at_resolution(L, xs, res.target, t, omega, n, opt.newton, &res.path);
  }
  return res;
}

std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw Error(ErrorKind::InvalidInput, "invalid geometric grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, double(i) / (n - 1));
  g.back() = hi;
  return g;
}

BarrierSample peierls_barrier(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y,
                              const CohomologyClass& omega, double alpha, const std::vector<double>& t_grid,
                              const PotentialOptions& opt) {
  if (t_grid.empty() || !std::is_sorted(t_grid.begin(), t_grid.end()) || t_grid.back() < 20.0)
    throw Error(ErrorKind::InvalidInput, "barrier grid must be increasing with max >= 20");
  BarrierSample b;
  b.x = x;
  b.y = y;
  b.omega = omega;
  b.alpha = alpha;
  b.t_grid = t_grid;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double t : t_grid) {
    try {
      b.values.push_back(action_potential(L, x, y, t, omega, opt).value + alpha * t);
    } catch (const Error&) {
      b.values.push_back(nan);
      ++b.failures;
    }
  }
  double run = std::numeric_limits<double>::infinity();
  for (double v : b.values) {
    if (std::isfinite(v)) run = std::min(run, v);
    b.running.push_back(run);
  }
  const std::size_t tail = b.values.size() / 2;
  double tmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = tail; i < b.values.size(); ++i)
    if (std::isfinite(b.values[i])) tmin = std::min(tmin, b.values[i]);
  if (!std::isfinite(tmin)) throw Error(ErrorKind::Convergence, "every tail grid point failed");
  b.running_min = tmin;
  return b;
}

double aubry_semidistance(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y,
                          const CohomologyClass& omega, double alpha, const std::vector<double>& t_grid,
                          const PotentialOptions& opt) {
  return peierls_barrier(L, x, y, omega, alpha, t_grid, opt).running_min +
         peierls_barrier(L, y, x, omega, alpha, t_grid, opt).running_min;
}

double trajectory_action(const TonelliLagrangian& L, const Trajectory& seg, const CohomologyClass& omega,
                         double alpha) {
  if (seg.times.size() < 2) throw Error(ErrorKind::InsufficientData, "segment has fewer than two samples");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < seg.times.size(); ++i) {
    const double dt = seg.times[i + 1] - seg.times[i];
    s += 0.5 * dt * (L.value(seg.lifts[i].x, seg.states[i].v) + L.value(seg.lifts[i + 1].x, seg.states[i + 1].v));
  }
  const Vec2 disp = seg.lifts.back().x - seg.lifts.front().x;
  return s + alpha * seg.duration() - omega.w.dot(disp);
}

double semistatic_residual(const TonelliLagrangian& L, const Trajectory& segment, const CohomologyClass& omega,
                           double alpha, const PotentialOptions& opt) {
  const double tau = segment.duration();
  if (!(tau >= 1.0)) throw Error(ErrorKind::InvalidInput, "semi-static test needs a segment of duration >= 1");
  const double a = trajectory_action(L, segment, omega, alpha);
  const TorusPoint x = wrap(segment.lifts.front().x);
  const TorusPoint y = wrap(segment.lifts.back().x);
  double best = std::numeric_limits<double>::infinity();
  for (double f : {0.9, 0.95, 1.0, 1.05, 1.1}) {
    const double t = f * tau;
    best = std::min(best, action_potential(L, x, y, t, omega, opt).value + alpha * t);
  }
  return a - best;
}

void write_barrier_csv(std::ostream& os, const BarrierSample& b, bool header) {
  if (header) os << "x1,x2,y1,y2,t,phi_plus_alpha_t,running_min\n";
  for (std::size_t i = 0; i < b.t_grid.size(); ++i)
    fmt::print(os, "{},{},{},{},{},{},{}\n", b.x.x(0), b.x.x(1), b.y.x(0), b.y.x(1), b.t_grid[i], b.values[i],
               b.running[i]);
}

}  // namespace amlab
