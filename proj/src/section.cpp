#include "amlab/section.hpp"

#include <cmath>
#include <limits>

namespace amlab {

namespace {

double hamiltonian_at(const TonelliLagrangian& L, const Vec2& x, const Vec2& p, Vec2& v) {
  v = inverse_legendre_v(L, x, p);
  return p.dot(v) - L.value(x, v);
}

}  // namespace

double Section::s_period() const {
  for (int t = 1; t <= periods.p1 * periods.p2; ++t) {
    const std::int64_t a = std::int64_t(t) * m(1);
    const std::int64_t b = std::int64_t(t) * m(0);
    if (a % periods.p1 == 0 && b % periods.p2 == 0) return double(t);
  }
  return double(periods.p1 * periods.p2);
}

Vec2 Section::position(double s) const {
  const Vec2 n = normal();
  return sigma0 * n / n.squaredNorm() + s * mperp();
}

std::optional<PhasePoint> Section::lift(const TonelliLagrangian& L, const Vec2& z, double pn_guess) const {
  const Vec2 x = position(z(0));
  const Vec2 t = tangent(), nu = unit_normal();
  double pn = pn_guess;
  double step = 0.5 * std::max(1.0, std::abs(pn_guess));
  Vec2 v;
  try {
    for (int it = 0; it < 200; ++it) {
      const Vec2 p = z(1) * t + pn * nu;
      const double f = hamiltonian_at(L, x, p, v) - energy;
      const double df = v.dot(nu);
      if (df <= 1e-12) {
        // left of the minimum in p_n; move towards the forward branch
        pn += step;
        step *= 2.0;
        continue;
      }
      const double d = f / df;
      pn -= d;
      if (std::abs(d) <= 1e-14 * std::max(1.0, std::abs(pn))) {
        const Vec2 pf = z(1) * t + pn * nu;
        hamiltonian_at(L, x, pf, v);
        if (v.dot(nu) <= 0.0) return std::nullopt;
        return PhasePoint{x, v};
      }
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return std::nullopt;
}

Vec2 Section::project(const TonelliLagrangian& L, const PhasePoint& y) const {
  const double k = std::round(sigma(y.x) - sigma0);
  const Vec2 x = y.x - k * kappa.as_vec();
  const Vec2 mp = mperp();
  const Vec2 p = L.jet(y.x, y.v).Lv;
  return {mp.dot(x) / mp.squaredNorm(), p.dot(tangent())};
}

double Section::normal_momentum(const TonelliLagrangian& L, const PhasePoint& y) const {
  return L.jet(y.x, y.v).Lv.dot(unit_normal());
}

Section make_section(IntClass kappa, const Vec2& x, const Vec2& v, double energy, CellPeriods periods) {
  if (kappa.is_zero()) throw Error(ErrorKind::Inapplicable, "section needs a non-zero class");
  std::int64_t a = 0, b = 0;
  const std::int64_t g = ext_gcd(kappa.k, kappa.l, a, b);
  if (g != 1) throw Error(ErrorKind::Inapplicable, "section needs a primitive class");
  const Vec2 perp(double(-kappa.l), double(kappa.k));
  const Vec2 m0{double(a), double(b)};
  double best = -2.0;
  Vec2 pick = m0;
  for (int j = -20; j <= 20; ++j) {
    const Vec2 m = m0 + double(j) * perp;
    const double c = v.norm() > 0 ? m.dot(v) / (m.norm() * v.norm()) : -m.norm();
    if (c > best + 1e-12 || (std::abs(c - best) <= 1e-12 && m.norm() < pick.norm())) {
      best = c;
      pick = m;
    }
  }
  Section s;
  s.m = Eigen::Vector2i(int(pick(0)), int(pick(1)));
  s.kappa = kappa;
  s.sigma0 = s.sigma(x);
  s.energy = energy;
  s.periods = periods;
  return s;
}

std::optional<ReturnResult> section_return(const TonelliLagrangian& L, const Section& sec, const Vec2& z,
                                           int direction, double pn_guess, bool with_jacobian,
                                           const ReturnOptions& opt) {
  const auto start = sec.lift(L, z, pn_guess);
  if (!start) return std::nullopt;
  const double dir = direction >= 0 ? 1.0 : -1.0;
  const double target = sec.sigma0 + dir;
  const Vec2 m = sec.normal();
  const double h = dir * opt.dt;

  PhasePoint cur = *start;
  Mat4 frame = Mat4::Identity();
  double t = 0.0;
  double sig = sec.sigma(cur.x);
  PhasePoint next;
  Mat4 next_frame;
  try {
    for (;;) {
      if (std::abs(t) > opt.t_max) return std::nullopt;
      if (with_jacobian) {
        const auto fp = propagate_variational(L, cur, h, opt.dt);
        next = fp.point;
        next_frame = fp.frame * frame;
      } else {
        next = rk4_step(L, cur, h);
      }
      if (!all_finite(next.x) || !all_finite(next.v)) return std::nullopt;
      const double sn = sec.sigma(next.x);
      // went back across the starting line: the orbit turned around
      if (dir * (sn - (sec.sigma0 - dir)) <= 0.0) return std::nullopt;
      if (dir * (sn - target) >= 0.0) {
        // locate the crossing inside this step
        double tau = h * (target - sig) / (sn - sig);
        PhasePoint y = cur;
        for (int it = 0; it < 8; ++it) {
          y = rk4_step(L, cur, tau);
          const double g = sec.sigma(y.x) - target;
          const double dg = m.dot(y.v);
          if (std::abs(dg) < 1e-14) break;
          const double d = g / dg;
          tau -= d;
          if (std::abs(d) < 1e-15) break;
        }
        ReturnResult r;
        r.start = *start;
        if (with_jacobian) {
          const auto fp = propagate_variational(L, cur, tau, std::abs(tau) + 1e-300);
          r.end = fp.point;
          r.frame = fp.frame * frame;
        } else {
          r.end = rk4_step(L, cur, tau);
        }
        r.time = t + tau;
        r.z = sec.project(L, r.end);
        if (with_jacobian) {
          // input embedding (s, p_t) -> (x, v)
          const Jet j0 = L.jet(r.start.x, r.start.v);
          const Vec2 tn = sec.tangent(), nu = sec.unit_normal(), mp = sec.mperp();
          const double vn = r.start.v.dot(nu);
          const double dpn_ds = j0.Lx.dot(mp) / vn;
          const double dpn_dpt = -r.start.v.dot(tn) / vn;
          const Mat2 Winv = j0.Lvv.inverse();
          Eigen::Matrix<double, 4, 2> din;
          const Vec2 dx_s = mp;
          const Vec2 dp_s = dpn_ds * nu;
          const Vec2 dp_pt = tn + dpn_dpt * nu;
          din.block<2, 1>(0, 0) = dx_s;
          din.block<2, 1>(2, 0) = Winv * (dp_s - j0.Lvx * dx_s);
          din.block<2, 1>(0, 1) = Vec2::Zero();
          din.block<2, 1>(2, 1) = Winv * dp_pt;
          // flow-time correction onto the target line
          Vec4 f;
          f << r.end.v, L.acceleration(r.end.x, r.end.v);
          Vec4 grad = Vec4::Zero();
          grad.head<2>() = m;
          const Mat4 proj = Mat4::Identity() - f * grad.transpose() / grad.dot(f);
          // output (x, v) -> (s, p_t)
          const Jet j1 = L.jet(r.end.x, r.end.v);
          Eigen::Matrix<double, 2, 4> dout;
          dout.block<1, 2>(0, 0) = mp.transpose() / mp.squaredNorm();
          dout.block<1, 2>(0, 2).setZero();
          dout.block<1, 2>(1, 0) = tn.transpose() * j1.Lvx;
          dout.block<1, 2>(1, 2) = tn.transpose() * j1.Lvv;
          r.jacobian = dout * proj * r.frame * din;
        }
        return r;
      }
      cur = next;
      if (with_jacobian) frame = next_frame;
      sig = sn;
      t += h;
    }
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace amlab
