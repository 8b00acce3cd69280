#include "amlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "amlab/parallel.hpp"

namespace amlab {

namespace {

Vec4 energy_gradient(const TonelliLagrangian& L, const Vec2& x, const Vec2& v) {
  const Jet j = L.jet(x, v);
  Vec4 g;
  g << j.Lvx.transpose() * v - j.Lx, j.Lvv * v;
  return g;
}

std::optional<PhasePoint> project_to_level(const TonelliLagrangian& L, PhasePoint p, double c) {
  for (int it = 0; it < 4; ++it) {
    const double e = energy(L, p.x, p.v) - c;
    if (std::abs(e) <= 1e-12) break;
    const Vec4 g = energy_gradient(L, p.x, p.v);
    const double gg = g.squaredNorm();
    if (!(gg > 1e-24)) return std::nullopt;
    p = PhasePoint::from_vec(p.as_vec() - e / gg * g);
  }
  if (std::abs(energy(L, p.x, p.v) - c) > 1e-9) return std::nullopt;
  p.x = wrap(p.x).x;
  return p;
}

// speed beyond which every state of the grid is above the level
double speed_bound(const TonelliLagrangian& L, double c) {
  double V = 0.5;
  for (int round = 0; round < 60; ++round, V *= 1.2) {
    bool above = true;
    for (int i = 0; i < 16 && above; ++i)
      for (int j = 0; j < 16 && above; ++j)
        for (int d = 0; d < 16 && above; ++d) {
          const double a = 2 * std::numbers::pi * d / 16;
          above = energy(L, Vec2(i / 16.0, j / 16.0), V * Vec2(std::cos(a), std::sin(a))) > c + 0.25;
        }
    if (above) return V;
  }
  throw Error(ErrorKind::InvalidInput, "level sampling: no speed bound found for the energy level");
}

}  // namespace

std::vector<PhasePoint> sample_level(const TonelliLagrangian& L, double c, const LevelSamplingOptions& opt) {
  double emin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j) emin = std::min(emin, energy(L, Vec2(i / 64.0, j / 64.0), Vec2::Zero()));
  if (c < emin) throw Error(ErrorKind::InvalidInput, fmt::format("energy level {} is empty (min E ~ {:.6f})", c, emin));
  const double V = speed_bound(L, c);
  std::vector<PhasePoint> out;
  std::size_t chunk = 0;
  // rounds have a fixed width so the sample set does not depend on the worker count
  const std::size_t width = 8;
  while (out.size() < opt.count) {
    if (chunk * opt.chunk >= opt.max_draws)
      throw Error(ErrorKind::InsufficientData,
                  fmt::format("level sampling: {} of {} points after {} draws", out.size(), opt.count, opt.max_draws));
    const auto got = parallel_map<std::vector<PhasePoint>>(width, [&](std::size_t r) {
      std::mt19937_64 rng(task_seed(opt.seed, chunk + r));
      std::uniform_real_distribution<double> ux(0.0, 1.0), uv(-V, V);
      std::vector<PhasePoint> acc;
      for (std::size_t k = 0; k < opt.chunk; ++k) {
        const Vec2 x(ux(rng), ux(rng));
        const Vec2 v(uv(rng), uv(rng));
        if (std::abs(energy(L, x, v) - c) > opt.band) continue;
        if (auto p = project_to_level(L, {x, v}, c)) acc.push_back(*p);
      }
      return acc;
    });
    chunk += width;
    for (const auto& g : got)
      for (const auto& p : g)
        if (out.size() < opt.count) out.push_back(p);
  }
  return out;
}

double phase_distance(const PhasePoint& a, const PhasePoint& b) {
  Vec2 dx = a.x - b.x;
  dx -= dx.array().round().matrix();
  return std::sqrt(dx.squaredNorm() + (a.v - b.v).squaredNorm());
}

namespace {

struct Samples {
  std::size_t n = 0;
  std::size_t k = 0;  // stored times per orbit
  std::vector<float> data;  // n x k x 4

  const float* at(std::size_t i) const { return data.data() + i * k * 4; }
};

// greedy (delta, T) cover in sample order: a point opens a new ball unless an
// existing center stays within delta up to step kt
std::size_t greedy_cover(const Samples& s, double delta, std::size_t kt) {
  const int nc = std::max(1, int(std::floor(1.0 / delta)));
  std::vector<std::vector<std::uint32_t>> cells(std::size_t(nc * nc));
  const float d2max = float(delta * delta);
  auto cell_of = [&](const float* p, int& cx, int& cy) {
    cx = std::min(nc - 1, int(std::floor(double(p[0]) * nc)));
    cy = std::min(nc - 1, int(std::floor(double(p[1]) * nc)));
  };
  auto inside = [&](const float* a, const float* b) {
    for (std::size_t t = 0; t <= kt; ++t) {
      const float* pa = a + 4 * t;
      const float* pb = b + 4 * t;
      float dx = pa[0] - pb[0], dy = pa[1] - pb[1];
      dx -= std::round(dx);
      dy -= std::round(dy);
      const float dv0 = pa[2] - pb[2], dv1 = pa[3] - pb[3];
      if (dx * dx + dy * dy + dv0 * dv0 + dv1 * dv1 >= d2max) return false;
    }
    return true;
  };
  std::size_t count = 0;
  std::vector<int> seen;
  for (std::size_t i = 0; i < s.n; ++i) {
    const float* p = s.at(i);
    int cx = 0, cy = 0;
    cell_of(p, cx, cy);
    bool covered = false;
    seen.clear();
    for (int a = -1; a <= 1 && !covered; ++a)
      for (int b = -1; b <= 1 && !covered; ++b) {
        const int id = ((cx + a + nc) % nc) * nc + (cy + b + nc) % nc;
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) continue;
        seen.push_back(id);
        for (std::uint32_t j : cells[std::size_t(id)])
          if (inside(p, s.at(j))) {
            covered = true;
            break;
          }
      }
    if (!covered) {
      cells[std::size_t(cx * nc + cy)].push_back(std::uint32_t(i));
      ++count;
    }
  }
  return count;
}

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = double(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

EntropyReport covering_entropy(const TonelliLagrangian& L, double c, const CoveringOptions& opt) {
  if (opt.t_grid.size() < 2 || opt.delta_grid.empty())
    throw Error(ErrorKind::InvalidInput, "covering entropy needs at least two times and one delta");
  if (opt.sampling.count < 10000)
    throw Error(ErrorKind::InvalidInput, "covering entropy needs a sample budget of at least 10^4 level points");
  EntropyReport r;
  r.c = c;
  r.method = "covering";
  r.t_grid = opt.t_grid;
  const auto pts = sample_level(L, c, opt.sampling);
  const double t_max = *std::max_element(opt.t_grid.begin(), opt.t_grid.end());
  Samples s;
  s.n = pts.size();
  s.k = std::size_t(std::ceil(t_max / opt.sample_dt - 1e-9)) + 1;
  const auto orbits = parallel_map<std::vector<float>>(s.n, [&](std::size_t i) {
    std::vector<float> o(s.k * 4);
    PhasePoint y = pts[i];
    for (std::size_t t = 0; t < s.k; ++t) {
      if (t > 0) y = propagate(L, y, opt.sample_dt, opt.dt);
      o[4 * t] = float(y.x(0));
      o[4 * t + 1] = float(y.x(1));
      o[4 * t + 2] = float(y.v(0));
      o[4 * t + 3] = float(y.v(1));
    }
    return o;
  });
  s.data.reserve(s.n * s.k * 4);
  for (const auto& o : orbits) s.data.insert(s.data.end(), o.begin(), o.end());

  const std::size_t nt = opt.t_grid.size();
  const auto counts = parallel_map<std::size_t>(opt.delta_grid.size() * nt, [&](std::size_t q) {
    const double T = opt.t_grid[q % nt];
    return greedy_cover(s, opt.delta_grid[q / nt], std::size_t(std::llround(T / opt.sample_dt)));
  });
  for (std::size_t d = 0; d < opt.delta_grid.size(); ++d) {
    CoveringRow row;
    row.delta = opt.delta_grid[d];
    std::vector<double> logs;
    for (std::size_t t = 0; t < nt; ++t) {
      row.counts.push_back(counts[d * nt + t]);
      logs.push_back(std::log(double(row.counts.back())));
    }
    row.slope = fit_slope(opt.t_grid, logs);
    row.resolution_limited = double(*std::max_element(row.counts.begin(), row.counts.end())) > opt.saturation * double(s.n);
    r.covering.push_back(std::move(row));
  }
  // headline: the smallest delta whose cover is not resolution-limited
  const CoveringRow* best = nullptr;
  for (const auto& row : r.covering)
    if (!row.resolution_limited && (!best || row.delta < best->delta)) best = &row;
  if (best) {
    r.estimate = best->slope;
    r.notes.push_back(fmt::format("estimate from delta = {}", best->delta));
  } else {
    const auto it = std::max_element(r.covering.begin(), r.covering.end(),
                                      [](const CoveringRow& a, const CoveringRow& b) { return a.delta < b.delta; });
    r.estimate = it->slope;
    r.status = "resolution-limited";
    r.notes.push_back(fmt::format("every delta saturates the {} samples; slope of delta = {} reported", s.n, it->delta));
  }
  return r;
}

LyapunovRun lyapunov_from(const TonelliLagrangian& L, const PhasePoint& start, const Vec4& tangent,
                          const LyapunovOptions& opt) {
  LyapunovRun run;
  run.start = start;
  const int steps = std::max(1, int(std::llround(opt.t_total / opt.renorm_dt)));
  const int skip = int(std::floor(opt.burn_in * steps));
  const double h = opt.direction * opt.t_total / steps;
  Vec4 w = tangent.normalized();
  PhasePoint y = start;
  const double e0 = energy(L, start.x, start.v);
  double sum = 0.0;
  for (int i = 0; i < steps; ++i) {
    const FramedPoint f = propagate_variational(L, y, h, opt.dt);
    y = f.point;
    w = f.frame * w;
    const double norm = w.norm();
    w /= norm;
    if (i >= skip) {
      sum += std::log(norm);
      run.series.push_back(sum / (double(i - skip + 1) * std::abs(h)));
    }
  }
  run.exponent = run.series.empty() ? 0.0 : run.series.back();
  run.valid = std::abs(energy(L, y.x, y.v) - e0) <= opt.drift_budget * opt.t_total;
  return run;
}

EntropyReport lyapunov_exponent(const TonelliLagrangian& L, double c, const LyapunovOptions& opt) {
  EntropyReport r;
  r.c = c;
  r.method = "lyapunov";
  LevelSamplingOptions so = opt.sampling;
  so.count = std::size_t(opt.orbits);
  so.seed = opt.seed;
  const auto pts = sample_level(L, c, so);
  r.lyapunov = parallel_map<LyapunovRun>(pts.size(), [&](std::size_t i) {
    std::mt19937_64 rng(task_seed(opt.seed ^ 0x9e3779b97f4a7c15ULL, i));
    std::normal_distribution<double> nd;
    const Vec4 w(nd(rng), nd(rng), nd(rng), nd(rng));
    return lyapunov_from(L, pts[i], w, opt);
  });
  int valid = 0;
  r.estimate = -std::numeric_limits<double>::infinity();
  for (const auto& run : r.lyapunov)
    if (run.valid) {
      ++valid;
      r.estimate = std::max(r.estimate, run.exponent);
    }
  if (2 * valid < opt.orbits)
    throw Error(ErrorKind::InsufficientData,
                fmt::format("lyapunov: only {} of {} orbits kept their energy", valid, opt.orbits));
  if (valid < opt.orbits) r.notes.push_back(fmt::format("{} orbits rejected for energy drift", opt.orbits - valid));
  return r;
}

EntropyReport horseshoe_bound(const ConnectionGraph& g, double c) {
  const auto cycle = shortest_cycle(g);
  if (!cycle) throw Error(ErrorKind::Inapplicable, "horseshoe bound: the graph has no transverse cycle");
  EntropyReport r;
  r.c = c;
  r.method = "horseshoe";
  r.certificate = true;
  HorseshoeData h{*cycle, 0, cycle->time};
  h.m = cycle->edges.size() == 1 ? 2 : int(cycle->edges.size());
  r.estimate = std::log(double(h.m)) / h.t_cycle;
  r.horseshoe = h;
  r.notes.push_back("log m / t_cycle is a heuristic scale; the transverse cycle is the certificate");
  return r;
}

void write_covering_csv(std::ostream& os, const EntropyReport& r) {
  os << "delta,T,count,slope,resolution_limited\n";
  for (const auto& row : r.covering)
    for (std::size_t t = 0; t < row.counts.size(); ++t)
      os << fmt::format("{},{},{},{},{}\n", row.delta, r.t_grid[t], row.counts[t], row.slope,
                        row.resolution_limited ? 1 : 0);
}

void write_lyapunov_csv(std::ostream& os, const EntropyReport& r) {
  os << "orbit,step,estimate\n";
  for (std::size_t i = 0; i < r.lyapunov.size(); ++i)
    for (std::size_t k = 0; k < r.lyapunov[i].series.size(); ++k)
      os << fmt::format("{},{},{}\n", i, k, r.lyapunov[i].series[k]);
}

}  // namespace amlab
