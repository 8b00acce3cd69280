#include "amlab/manifolds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

namespace amlab {

const char* to_string(Branch b) { return b == Branch::Unstable ? "unstable" : "stable"; }

double ManifoldCurve::max_spacing() const {
  double m = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) m = std::max(m, (points[i] - points[i - 1]).norm());
  return m;
}

double ManifoldCurve::length() const {
  double l = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) l += (points[i] - points[i - 1]).norm();
  return l;
}

ManifoldCurve ManifoldCurve::shifted(const Vec2& dz) const {
  ManifoldCurve c = *this;
  c.fixed_point += dz;
  for (auto& p : c.points) p += dz;
  return c;
}

Vec2 eigendirection(const Mat2& dp, Branch branch, double* multiplier) {
  const auto fl = classify(dp, {0.0, 0.0, 1.0});
  if (std::abs(fl.lambda[0].imag()) > 0.0) throw Error(ErrorKind::Inapplicable, "fixed point is not hyperbolic");
  const double big = fl.lambda[0].real(), small = fl.lambda[1].real();
  const double lam = branch == Branch::Unstable ? big : small;
  if (std::abs(std::abs(big) - std::abs(small)) < 1e-12)
    throw Error(ErrorKind::Inapplicable, "fixed point is not hyperbolic");
  if (multiplier) *multiplier = lam;
  // kernel of dp - lam I from its better-conditioned row
  const Vec2 r1(dp(0, 1), lam - dp(0, 0));
  const Vec2 r2(lam - dp(1, 1), dp(1, 0));
  Vec2 e = r1.norm() >= r2.norm() ? r1 : r2;
  e.normalize();
  if (e(0) < 0.0 || (e(0) == 0.0 && e(1) < 0.0)) e = -e;
  return e;
}

namespace {

struct Chain {
  double theta = 0.0;
  std::vector<Vec2> z;
  std::vector<double> age;
  std::vector<double> pn;
  bool escaped = false;
};

struct Globalizer {
  const TonelliLagrangian& L;
  const PeriodicOrbit& orbit;
  int direction;
  int repeats;
  Vec2 e;
  double sign;
  double mu;
  const ManifoldOptions& opt;

  Chain start(double theta) const {
    Chain c;
    c.theta = theta;
    c.z.push_back(orbit.z + sign * opt.eps0 * std::pow(mu, theta) * e);
    c.age.push_back(0.0);
    c.pn.push_back(orbit.pn);
    return c;
  }

  void extend(Chain& c, std::size_t level) const {
    while (c.z.size() <= level && !c.escaped) {
      Vec2 z = c.z.back();
      double pn = c.pn.back();
      double age = c.age.back();
      for (int r = 0; r < repeats; ++r) {
        const auto ret = section_return(L, orbit.section, z, direction, pn, false, opt.ret);
        if (!ret) {
          c.escaped = true;
          return;
        }
        z = ret->z;
        pn = orbit.section.normal_momentum(L, ret->end);
        age += std::abs(ret->time);
      }
      c.z.push_back(z);
      c.pn.push_back(pn);
      c.age.push_back(age);
    }
  }
};

}  // namespace

ManifoldCurve globalize_manifold(const TonelliLagrangian& L, const PeriodicOrbit& orbit, Branch branch, int sign,
                                 const ManifoldOptions& opt) {
  double lam = 0.0;
  const Vec2 e = eigendirection(orbit.reduced, branch, &lam);
  const int repeats = lam < 0.0 ? 2 : 1;
  double mu = std::abs(lam);
  if (branch == Branch::Stable) mu = 1.0 / mu;
  mu = std::pow(mu, repeats);
  const Globalizer g{L, orbit, branch == Branch::Unstable ? +1 : -1, repeats, e, sign >= 0 ? 1.0 : -1.0, mu, opt};

  std::vector<Chain> chains;
  for (int i = 0; i <= 8; ++i) chains.push_back(g.start(i / 8.0));

  ManifoldCurve out;
  out.branch = branch;
  out.sign = sign >= 0 ? 1 : -1;
  out.fixed_point = orbit.z;
  out.lambda = mu;
  out.direction = e;
  double total = 0.0;
  int levels = 0;
  for (int k = 0; k <= opt.max_steps; ++k) {
    const std::size_t lk = std::size_t(k);
    bool escaped = false;
    for (auto& c : chains) {
      g.extend(c, lk);
      escaped = escaped || c.z.size() <= lk;
    }
    bool budget = false;
    while (!escaped && !budget) {
      std::vector<Chain> next;
      next.reserve(chains.size() * 2);
      bool inserted = false;
      for (std::size_t i = 0; i < chains.size(); ++i) {
        next.push_back(std::move(chains[i]));
        if (i + 1 == chains.size()) break;
        const Chain& a = next.back();
        const Chain& b = chains[i + 1];
        if ((a.z[lk] - b.z[lk]).norm() > opt.spacing && b.theta - a.theta > 1e-13) {
          Chain m = g.start(0.5 * (a.theta + b.theta));
          g.extend(m, lk);
          if (m.z.size() <= lk) escaped = true;
          next.push_back(std::move(m));
          inserted = true;
        }
      }
      chains = std::move(next);
      if (!inserted) break;
      if (chains.size() * (lk + 1) > std::size_t(opt.max_points)) budget = true;
    }
    if (escaped || budget) {
      out.truncated = true;
      out.status = escaped ? "escape" : "budget";
      break;
    }
    levels = k + 1;
    for (std::size_t i = 1; i < chains.size(); ++i) total += (chains[i].z[lk] - chains[i - 1].z[lk]).norm();
    if (total >= opt.max_length) break;
  }
  out.levels = levels;
  for (int k = 0; k < levels; ++k) {
    for (const auto& c : chains) {
      if (c.z.size() <= std::size_t(k)) continue;
      out.points.push_back(c.z[std::size_t(k)]);
      out.ages.push_back(c.age[std::size_t(k)]);
      out.params.push_back(k + c.theta);
    }
  }
  return out;
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a(0) * b(1) - a(1) * b(0); }

// derivative of the cubic through points i-1..i+2 at local parameter t of
// segment (i, i+1)
Vec2 cubic_tangent(const std::vector<Vec2>& p, std::size_t i, double t) {
  if (i == 0 || i + 2 >= p.size()) return p[i + 1] - p[i];
  const double dm = -(3 * t * t - 6 * t + 2) / 6.0;
  const double d0 = (3 * t * t - 4 * t - 1) / 2.0;
  const double d1 = -(3 * t * t - 2 * t - 2) / 2.0;
  const double d2 = (3 * t * t - 1) / 6.0;
  return dm * p[i - 1] + d0 * p[i] + d1 * p[i + 1] + d2 * p[i + 2];
}

struct CellKey {
  std::int64_t a, b;
  bool operator==(const CellKey&) const = default;
};
struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return std::hash<std::int64_t>()(k.a * 73856093LL ^ k.b * 19349663LL);
  }
};

}  // namespace

std::vector<Crossing> find_crossings(const ManifoldCurve& unstable, const ManifoldCurve& stable, double s_period,
                                     const std::vector<Vec2>& fixed_points, const IntersectionOptions& opt) {
  std::vector<Crossing> out;
  const auto& U = unstable.points;
  const auto& S = stable.points;
  if (U.size() < 2 || S.size() < 2) return out;

  const double cell = std::max(0.02, 2.0 * std::max(unstable.max_spacing(), 1e-3));
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid;
  double umin = U[0](0), umax = U[0](0);
  for (std::size_t i = 0; i + 1 < U.size(); ++i) {
    const Vec2 lo = U[i].cwiseMin(U[i + 1]), hi = U[i].cwiseMax(U[i + 1]);
    umin = std::min(umin, lo(0));
    umax = std::max(umax, hi(0));
    for (auto a = std::int64_t(std::floor(lo(0) / cell)); a <= std::int64_t(std::floor(hi(0) / cell)); ++a)
      for (auto b = std::int64_t(std::floor(lo(1) / cell)); b <= std::int64_t(std::floor(hi(1) / cell)); ++b)
        grid[{a, b}].push_back(i);
  }
  double smin = S[0](0), smax = S[0](0);
  for (const auto& p : S) {
    smin = std::min(smin, p(0));
    smax = std::max(smax, p(0));
  }
  int k_lo = int(std::floor((umin - smax) / s_period)) - 1;
  int k_hi = int(std::ceil((umax - smin) / s_period)) + 1;
  if (opt.zero_shift_only) k_lo = k_hi = 0;

  auto near_fixed = [&](const Vec2& z) {
    for (const auto& f : fixed_points) {
      double ds = z(0) - f(0);
      ds -= s_period * std::round(ds / s_period);
      if (std::hypot(ds, z(1) - f(1)) < opt.exclusion) return true;
    }
    return false;
  };

  std::vector<std::size_t> cand;
  for (int k = k_lo; k <= k_hi; ++k) {
    const Vec2 off(k * s_period, 0.0);
    for (std::size_t j = 0; j + 1 < S.size(); ++j) {
      const Vec2 q0 = S[j] + off, q1 = S[j + 1] + off;
      const Vec2 lo = q0.cwiseMin(q1), hi = q0.cwiseMax(q1);
      cand.clear();
      for (auto a = std::int64_t(std::floor(lo(0) / cell)); a <= std::int64_t(std::floor(hi(0) / cell)); ++a)
        for (auto b = std::int64_t(std::floor(lo(1) / cell)); b <= std::int64_t(std::floor(hi(1) / cell)); ++b) {
          auto it = grid.find({a, b});
          if (it != grid.end()) cand.insert(cand.end(), it->second.begin(), it->second.end());
        }
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      const Vec2 s = q1 - q0;
      for (std::size_t i : cand) {
        const Vec2 r = U[i + 1] - U[i];
        const double den = cross(r, s);
        if (std::abs(den) < 1e-300) continue;
        const Vec2 d = q0 - U[i];
        const double t = cross(d, s) / den;
        const double u = cross(d, r) / den;
        if (t < 0.0 || t >= 1.0 || u < 0.0 || u >= 1.0) continue;
        const Vec2 z = U[i] + t * r;
        if (near_fixed(z)) continue;
        Vec2 tu = cubic_tangent(U, i, t), ts = cubic_tangent(S, j, u);
        const double c = std::abs(tu.dot(ts)) / (tu.norm() * ts.norm());
        Crossing x;
        x.point = z;
        x.angle = std::acos(std::min(1.0, c));
        x.age_unstable = unstable.ages[i] + t * (unstable.ages[i + 1] - unstable.ages[i]);
        x.age_stable = stable.ages[j] + u * (stable.ages[j + 1] - stable.ages[j]);
        x.shift = k * s_period;
        x.transverse = x.angle >= opt.min_angle;
        bool dup = false;
        for (const auto& o : out)
          if (o.shift == x.shift && (o.point - x.point).norm() < 1e-9) dup = true;
        if (!dup) out.push_back(x);
      }
    }
  }
  return out;
}

}  // namespace amlab
