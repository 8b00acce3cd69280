#include "amlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace amlab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::AmbiguousLift: return "ambiguous-lift";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::DegenerateLoop: return "degenerate-loop";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::NotTonelli: return "not-tonelli";
    case ErrorKind::InconsistentDerivatives: return "inconsistent-derivatives";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::BelowCritical: return "below-critical";
    case ErrorKind::Bracketing: return "bracketing";
    case ErrorKind::Refinement: return "refinement";
    case ErrorKind::Inapplicable: return "inapplicable";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

bool all_finite(const Vec2& v) { return std::isfinite(v(0)) && std::isfinite(v(1)); }

bool HomologyClass::integral() const {
  return std::isfinite(h(0)) && std::isfinite(h(1)) && h(0) == std::round(h(0)) &&
         h(1) == std::round(h(1));
}

IntClass HomologyClass::as_int() const {
  if (!integral()) throw Error(ErrorKind::InvalidInput, "homology class is not integral");
  return {std::int64_t(h(0)), std::int64_t(h(1))};
}

std::int64_t gcd(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return a >= 0 ? a : -a;
  }
  std::int64_t x1 = 0, y1 = 0;
  const std::int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

DiscreteLoop::DiscreteLoop(std::vector<Vec2> nodes, double period, IntClass homology)
    : nodes_(std::move(nodes)), period_(period), homology_(homology) {
  if (int(nodes_.size()) < kMinNodes)
    throw Error(ErrorKind::Resolution, "a discrete loop needs at least 8 nodes");
  if (!(period_ > 0.0) || !std::isfinite(period_))
    throw Error(ErrorKind::DegenerateLoop, "loop period must be positive and finite");
  for (const auto& x : nodes_)
    if (!all_finite(x)) throw Error(ErrorKind::InvalidInput, "non-finite loop node");
}

DiscreteLoop DiscreteLoop::straight(const Vec2& x0, IntClass homology, double period, int n) {
  std::vector<Vec2> nodes(static_cast<std::size_t>(std::max(n, 0)));
  for (int i = 0; i < n; ++i) nodes[i] = x0 + (double(i) / n) * homology.as_vec();
  return DiscreteLoop(std::move(nodes), period, homology);
}

Vec2 DiscreteLoop::node(std::int64_t i) const {
  const std::int64_t n = size();
  std::int64_t q = i / n;
  std::int64_t r = i % n;
  if (r < 0) {
    r += n;
    q -= 1;
  }
  return nodes_[std::size_t(r)] + double(q) * homology_.as_vec();
}

DiscreteLoop DiscreteLoop::rotated(int shift) const {
  std::vector<Vec2> out(nodes_.size());
  for (int j = 0; j < size(); ++j) out[j] = node(j + shift);
  return DiscreteLoop(std::move(out), period_, homology_);
}

DiscreteLoop DiscreteLoop::with_period(double period) const {
  return DiscreteLoop(nodes_, period, homology_);
}

TorusPoint wrap(const LiftedPoint& p, CellPeriods periods) {
  if (!all_finite(p.x)) throw Error(ErrorKind::InvalidInput, "cannot wrap a non-finite point");
  TorusPoint out;
  const Vec2 per = periods.as_vec();
  for (int i = 0; i < 2; ++i) {
    double r = std::fmod(p.x(i), per(i));
    if (r < 0.0) r += per(i);
    // fmod of a tiny negative number can round up to the period itself
    if (r >= per(i)) r = 0.0;
    out.x(i) = r;
  }
  return out;
}

Vec2 minimal_displacement(const Vec2& a, const Vec2& b, CellPeriods periods) {
  const Vec2 per = periods.as_vec();
  Vec2 d = b - a;
  for (int i = 0; i < 2; ++i) d(i) -= per(i) * std::floor(d(i) / per(i) + 0.5);
  return d;
}

std::vector<LiftedPoint> continuous_lift(std::span<const TorusPoint> trajectory,
                                         const LiftedPoint& initial, CellPeriods periods) {
  std::vector<LiftedPoint> out;
  if (trajectory.empty()) return out;
  out.reserve(trajectory.size());
  const Vec2 per = periods.as_vec();
  const Vec2 start_offset = minimal_displacement(initial.x, trajectory[0].x, periods);
  if ((start_offset.array().abs() > 1e-9 * per.array()).any())
    throw Error(ErrorKind::InvalidInput, "initial lift does not project to the first point");
  out.push_back(initial);
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    const Vec2 raw = trajectory[i].x - trajectory[i - 1].x;
    const Vec2 d = minimal_displacement(trajectory[i - 1].x, trajectory[i].x, periods);
    for (int c = 0; c < 2; ++c) {
      // the step is ambiguous when the raw and the wrapped-around choices are
      // equally close
      const double alt = std::abs(raw(c)) < 0.5 * per(c) ? std::abs(raw(c)) : per(c) - std::abs(raw(c));
      if (std::abs(d(c)) >= 0.5 * per(c) || alt >= 0.5 * per(c))
        throw Error(ErrorKind::AmbiguousLift, "trajectory step exceeds half a period");
    }
    out.push_back({out.back().x + d});
  }
  return out;
}

DiscreteLoop resample_loop(const DiscreteLoop& loop, int m) {
  if (m < DiscreteLoop::kMinNodes)
    throw Error(ErrorKind::Resolution, "resampling needs at least 8 nodes");
  const int n = loop.size();
  if (m == n) return loop;
  std::vector<Vec2> out(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double s = double(j) * double(n) / double(m);
    const auto i = std::int64_t(std::floor(s));
    const double f = s - double(i);
    out[j] = (1.0 - f) * loop.node(i) + f * loop.node(i + 1);
  }
  return DiscreteLoop(std::move(out), loop.period(), loop.homology());
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Largest distance from a node of `a` to the polyline of `b` on the torus.
double directed_distance(const DiscreteLoop& a, const DiscreteLoop& b, CellPeriods periods) {
  double worst = 0.0;
  const int nb = b.size();
  for (const Vec2& p : a.nodes()) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nb; ++i) {
      const Vec2 s0 = b.node(i);
      const Vec2 s1 = b.node(i + 1);
      // translate p next to the segment start
      const Vec2 q = s0 + minimal_displacement(s0, p, periods);
      best = std::min(best, point_segment_distance(q, s0, s1));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double loop_distance(const DiscreteLoop& a, const DiscreteLoop& b, CellPeriods periods) {
  return std::max(directed_distance(a, b, periods), directed_distance(b, a, periods));
}

}  // namespace amlab
