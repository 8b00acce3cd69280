#include "amlab/orbits.hpp"

#include <cmath>

#include <fmt/format.h>

namespace amlab {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Hyperbolic: return "hyperbolic";
    case Stability::Elliptic: return "elliptic";
    case Stability::Degenerate: return "degenerate";
    case Stability::Uncertain: return "classification-uncertain";
  }
  return "?";
}

FloquetPair classify(const Mat2& reduced, const ClassifyOptions& opt) {
  FloquetPair out;
  const double tr = reduced.trace();
  const double det = reduced.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    // stable formula for the smaller root
    const double big = 0.5 * (tr + (tr >= 0 ? r : -r));
    const double small = big != 0.0 ? det / big : 0.5 * (tr - r);
    out.lambda = {std::complex<double>(big, 0.0), std::complex<double>(small, 0.0)};
  } else {
    const double im = 0.5 * std::sqrt(-disc);
    out.lambda = {std::complex<double>(0.5 * tr, im), std::complex<double>(0.5 * tr, -im)};
  }
  if (!std::isfinite(tr) || !std::isfinite(det) || std::abs(det - 1.0) > opt.det_tol) {
    out.stability = Stability::Uncertain;
    return out;
  }
  const double mod = std::abs(out.lambda[0]);
  if (disc >= 0.0) {
    out.stability = mod > 1.0 + opt.tol_hyperbolic ? Stability::Hyperbolic : Stability::Degenerate;
  } else {
    // on the unit circle away from +-1
    const double im = std::abs(out.lambda[0].imag());
    out.stability = im > opt.tol_elliptic ? Stability::Elliptic : Stability::Degenerate;
  }
  return out;
}

double loop_energy(const TonelliLagrangian& L, const DiscreteLoop& loop) {
  const int n = loop.size();
  const double h = loop.step();
  double e = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = loop.node(i), b = loop.node(i + 1);
    e += energy(L, 0.5 * (a + b), (b - a) / h);
  }
  return e / n;
}

PeriodicOrbit refine_orbit(const TonelliLagrangian& L, const DiscreteLoop& candidate, const RefineOptions& opt) {
  const int n = candidate.size();
  const double h = candidate.step();
  int best = 0;
  double speed = -1.0;
  for (int i = 0; i < n; ++i) {
    const double sp = (candidate.node(i + 1) - candidate.node(i)).norm() / h;
    if (sp > speed) {
      speed = sp;
      best = i;
    }
  }
  const Vec2 a = candidate.node(best), b = candidate.node(best + 1);
  const Vec2 x = 0.5 * (a + b), v = (b - a) / h;
  const double c = opt.energy ? *opt.energy : loop_energy(L, candidate);
  const Section sec = make_section(candidate.homology(), x, v, c, opt.periods);
  const PhasePoint y{x, v};
  return refine_on_section(L, sec, sec.project(L, y), sec.normal_momentum(L, y), opt);
}

PeriodicOrbit refine_on_section(const TonelliLagrangian& L, const Section& sec, const Vec2& z0, double pn_guess,
                                const RefineOptions& opt) {
  ReturnOptions ro;
  ro.dt = opt.dt;
  Vec2 z = z0;
  double pn = pn_guess;
  auto r = section_return(L, sec, z, +1, pn, true, ro);
  if (!r) throw Error(ErrorKind::Refinement, "refinement: candidate does not return to its section");
  double res = (r->z - z).norm();
  int it = 0;
  for (; it < opt.max_iter && res > opt.tol; ++it) {
    const Vec2 F = r->z - z;
    const Mat2 J = r->jacobian - Mat2::Identity();
    Eigen::JacobiSVD<Mat2> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-9);
    const Vec2 step = -svd.solve(F);
    double lam = 1.0;
    bool accepted = false;
    for (int k = 0; k < 12; ++k) {
      const Vec2 zt = z + lam * step;
      auto rt = section_return(L, sec, zt, +1, pn, true, ro);
      if (rt) {
        const double rest = (rt->z - zt).norm();
        if (rest < res || k == 11) {
          z = zt;
          r = rt;
          res = rest;
          pn = sec.normal_momentum(L, r->start);
          accepted = true;
          break;
        }
      }
      lam *= 0.5;
    }
    if (!accepted) throw Error(ErrorKind::Refinement, "refinement: return map undefined near the candidate");
  }
  if (res > opt.tol)
    throw Error(ErrorKind::Refinement, fmt::format("refinement: residual {:.3e} after {} iterations", res, it));
  if (r->time < 0.01) throw Error(ErrorKind::DegenerateLoop, "refinement: period collapsed");

  PeriodicOrbit o;
  o.seed = r->start;
  o.period = r->time;
  o.homology = sec.kappa;
  o.energy = energy(L, o.seed.x, o.seed.v);
  o.section = sec;
  o.z = z;
  o.pn = sec.normal_momentum(L, o.seed);
  o.monodromy = r->frame;
  o.reduced = r->jacobian;
  o.floquet = classify(o.reduced, opt.classify);
  o.residual = res;
  Vec4 gap;
  gap << r->end.x - sec.kappa.as_vec() - o.seed.x, r->end.v - o.seed.v;
  o.closure_gap = gap.norm();
  o.iterations = it;
  return o;
}

Trajectory orbit_trajectory(const TonelliLagrangian& L, const PeriodicOrbit& orbit, double dt) {
  FlowOptions fo;
  fo.periods = orbit.section.periods;
  return integrate_lifted(L, orbit.seed, orbit.period, dt, fo);
}

DiscreteLoop orbit_loop(const TonelliLagrangian& L, const PeriodicOrbit& orbit, int n, double dt) {
  std::vector<Vec2> nodes;
  nodes.reserve(std::size_t(n));
  PhasePoint cur = orbit.seed;
  const double h = orbit.period / n;
  for (int i = 0; i < n; ++i) {
    nodes.push_back(cur.x);
    cur = propagate(L, cur, h, dt);
  }
  return DiscreteLoop(std::move(nodes), orbit.period, orbit.homology);
}

PeriodicOrbit resection(const TonelliLagrangian& L, const PeriodicOrbit& orbit, const Section& target,
                        const RefineOptions& opt) {
  if (!(orbit.homology == target.kappa))
    throw Error(ErrorKind::Inapplicable, "resection: orbit class differs from the section class");
  // march along the orbit until it meets a line sigma0 + k of the target
  const double h = opt.dt;
  PhasePoint cur = orbit.seed;
  double t = 0.0;
  auto frac = [&](const Vec2& x) { return target.sigma(x) - target.sigma0 - std::floor(target.sigma(x) - target.sigma0); };
  double f = frac(cur.x);
  if (f < 1e-12 || f > 1.0 - 1e-12) {
    RefineOptions ro = opt;
    ro.energy = orbit.energy;
    return refine_on_section(L, target, target.project(L, cur), target.normal_momentum(L, cur), ro);
  }
  while (t < 2.0 * orbit.period) {
    const PhasePoint next = rk4_step(L, cur, h);
    const double fn = frac(next.x);
    if (fn < f) {
      // wrapped past an integer line; locate by linear interpolation
      const double s0 = target.sigma(cur.x), s1 = target.sigma(next.x);
      const double line = std::floor(s1 - target.sigma0) + target.sigma0;
      const double tau = h * (line - s0) / (s1 - s0);
      const PhasePoint y = rk4_step(L, cur, tau);
      RefineOptions ro = opt;
      ro.energy = orbit.energy;
      return refine_on_section(L, target, target.project(L, y), target.normal_momentum(L, y), ro);
    }
    cur = next;
    f = fn;
    t += h;
  }
  throw Error(ErrorKind::Refinement, "resection: orbit does not cross the target section");
}

PeriodicOrbit translated(const TonelliLagrangian& L, const PeriodicOrbit& orbit, const Vec2& shift,
                         const Section& target) {
  PeriodicOrbit o = orbit;
  o.seed.x += shift;
  o.seed.x -= std::round(target.sigma(o.seed.x) - target.sigma0) * target.kappa.as_vec();
  o.section = target;
  o.z = target.project(L, o.seed);
  o.pn = target.normal_momentum(L, o.seed);
  return o;
}

}  // namespace amlab
