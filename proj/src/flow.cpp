#include "amlab/flow.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace amlab {

namespace {

int step_count(double t, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorKind::InvalidInput, "time step must be positive");
  if (!std::isfinite(t)) throw Error(ErrorKind::InvalidInput, "non-finite integration time");
  return std::max(0, int(std::ceil(std::abs(t) / dt - 1e-9)));
}

Vec4 field(const TonelliLagrangian& L, const Vec4& y) {
  const Vec2 x = y.head<2>();
  const Vec2 v = y.tail<2>();
  const Vec2 a = L.acceleration(x, v);
  return {v(0), v(1), a(0), a(1)};
}

void check_state(const Vec4& y) {
  if (!y.allFinite()) throw Error(ErrorKind::IntegrationFailure, "state became non-finite");
}

void audit_energy(double e0, double e, double elapsed, const FlowOptions& opt) {
  if (!(opt.drift_budget > 0.0)) return;
  const double allowed = 100.0 * opt.drift_budget * std::max(1.0, std::abs(elapsed));
  if (!(std::abs(e - e0) <= allowed))
    throw Error(ErrorKind::IntegrationFailure,
                fmt::format("energy drift {:.3e} exceeds 100x budget after t = {}", std::abs(e - e0), elapsed));
}

double det_lvv(const TonelliLagrangian& L, const PhasePoint& y) { return L.jet(y.x, y.v).Lvv.determinant(); }

}  // namespace

VectorField el_vector_field(const TonelliLagrangian& L, const TangentState& s) {
  if (!all_finite(s.point.x) || !all_finite(s.v))
    throw Error(ErrorKind::InvalidInput, "non-finite tangent state");
  return {s.v, L.acceleration(s.point.x, s.v)};
}

PhasePoint rk4_step(const TonelliLagrangian& L, const PhasePoint& p, double h) {
  const Vec4 y = p.as_vec();
  const Vec4 k1 = field(L, y);
  const Vec4 k2 = field(L, y + 0.5 * h * k1);
  const Vec4 k3 = field(L, y + 0.5 * h * k2);
  const Vec4 k4 = field(L, y + h * k3);
  const Vec4 out = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  check_state(out);
  return PhasePoint::from_vec(out);
}

PhasePoint propagate(const TonelliLagrangian& L, const PhasePoint& y, double t, double dt) {
  const int n = step_count(t, dt);
  if (n == 0) return y;
  const double h = t / n;
  PhasePoint cur = y;
  for (int i = 0; i < n; ++i) cur = rk4_step(L, cur, h);
  return cur;
}

namespace {

struct Combined {
  Vec4 y;
  Mat4 m;
};

Combined combined_field(const TonelliLagrangian& L, const Combined& c) {
  const Vec2 x = c.y.head<2>();
  const Vec2 v = c.y.tail<2>();
  const Mat4 jac = L.flow_jacobian(x, v);
  const Vec2 a = L.acceleration(x, v);
  return {Vec4(v(0), v(1), a(0), a(1)), jac * c.m};
}

Combined combined_step(const TonelliLagrangian& L, const Combined& c, double h) {
  const auto add = [](const Combined& a, double s, const Combined& b) {
    return Combined{a.y + s * b.y, a.m + s * b.m};
  };
  const Combined k1 = combined_field(L, c);
  const Combined k2 = combined_field(L, add(c, 0.5 * h, k1));
  const Combined k3 = combined_field(L, add(c, 0.5 * h, k2));
  const Combined k4 = combined_field(L, add(c, h, k3));
  Combined out{c.y + (h / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
               c.m + (h / 6.0) * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m)};
  check_state(out.y);
  return out;
}

}  // namespace

FramedPoint propagate_variational(const TonelliLagrangian& L, const PhasePoint& y, double t, double dt) {
  const int n = step_count(t, dt);
  Combined c{y.as_vec(), Mat4::Identity()};
  if (n > 0) {
    const double h = t / n;
    for (int i = 0; i < n; ++i) c = combined_step(L, c, h);
  }
  return {PhasePoint::from_vec(c.y), c.m};
}

namespace {

void push_sample(Trajectory& tr, const TonelliLagrangian& L, double t, const PhasePoint& p) {
  tr.times.push_back(t);
  tr.states.push_back({wrap(p.x, tr.periods), p.v});
  tr.lifts.push_back({p.x});
  tr.energy_log.push_back(energy(L, p.x, p.v));
}

}  // namespace

Trajectory integrate_lifted(const TonelliLagrangian& L, const PhasePoint& y0, double t_final, double dt,
                            const FlowOptions& opt) {
  const int n = step_count(t_final, dt);
  const int every = std::max(1, opt.sample_every);
  Trajectory tr;
  tr.periods = opt.periods;
  push_sample(tr, L, 0.0, y0);
  if (n == 0) return tr;
  const double h = t_final / n;
  const double e0 = tr.energy_log.front();
  PhasePoint cur = y0;
  for (int i = 1; i <= n; ++i) {
    cur = rk4_step(L, cur, h);
    if (i % every == 0 || i == n) {
      push_sample(tr, L, i * h, cur);
      audit_energy(e0, tr.energy_log.back(), i * h, opt);
    }
  }
  return tr;
}

Trajectory integrate(const TonelliLagrangian& L, const TangentState& s0, double t_final, double dt,
                     const FlowOptions& opt) {
  if (!all_finite(s0.point.x) || !all_finite(s0.v))
    throw Error(ErrorKind::InvalidInput, "non-finite initial state");
  return integrate_lifted(L, {s0.point.x, s0.v}, t_final, dt, opt);
}

VariationalResult integrate_variational(const TonelliLagrangian& L, const TangentState& s0, double t_final,
                                        double dt, const FlowOptions& opt) {
  if (!all_finite(s0.point.x) || !all_finite(s0.v))
    throw Error(ErrorKind::InvalidInput, "non-finite initial state");
  const int n = step_count(t_final, dt);
  const int every = std::max(1, opt.sample_every);
  VariationalResult res;
  res.trajectory.periods = opt.periods;
  const PhasePoint y0{s0.point.x, s0.v};
  push_sample(res.trajectory, L, 0.0, y0);
  Combined c{y0.as_vec(), Mat4::Identity()};
  const double e0 = res.trajectory.energy_log.front();
  if (n > 0) {
    const double h = t_final / n;
    for (int i = 1; i <= n; ++i) {
      c = combined_step(L, c, h);
      if (i % every == 0 || i == n) {
        push_sample(res.trajectory, L, i * h, PhasePoint::from_vec(c.y));
        audit_energy(e0, res.trajectory.energy_log.back(), i * h, opt);
      }
    }
  }
  res.frame = c.m;
  res.expected_det = det_lvv(L, y0) / det_lvv(L, PhasePoint::from_vec(c.y));
  return res;
}

HomologyClass rotation_vector(const Trajectory& traj, double min_duration) {
  if (traj.lifts.size() < 2) throw Error(ErrorKind::InsufficientData, "trajectory has fewer than two samples");
  const double T = traj.duration();
  if (!(std::abs(T) >= min_duration))
    throw Error(ErrorKind::InsufficientData, "trajectory too short for a rotation vector");
  return {(traj.lifts.back().x - traj.lifts.front().x) / T};
}

namespace {

Vec4 ham_field(const TonelliLagrangian& L, const Vec4& y) {
  const Vec2 x = y.head<2>();
  const Vec2 p = y.tail<2>();
  const Vec2 v = inverse_legendre_v(L, x, p);
  const Vec2 lx = L.jet(x, v).Lx;
  return {v(0), v(1), lx(0), lx(1)};
}

}  // namespace

CotangentTrajectory hamiltonian_integrate(const TonelliLagrangian& L, const CotangentState& c0, double t_final,
                                          double dt, const FlowOptions& opt) {
  if (!all_finite(c0.point.x) || !all_finite(c0.p))
    throw Error(ErrorKind::InvalidInput, "non-finite initial state");
  const int n = step_count(t_final, dt);
  const int every = std::max(1, opt.sample_every);
  CotangentTrajectory tr;
  Vec4 y(c0.point.x(0), c0.point.x(1), c0.p(0), c0.p(1));
  const auto push = [&](double t) {
    const Vec2 x = y.head<2>();
    const Vec2 p = y.tail<2>();
    tr.times.push_back(t);
    tr.states.push_back({wrap(x, opt.periods), p});
    tr.lifts.push_back({x});
    const Vec2 v = inverse_legendre_v(L, x, p);
    tr.hamiltonian_log.push_back(p.dot(v) - L.value(x, v));
  };
  push(0.0);
  if (n == 0) return tr;
  const double h = t_final / n;
  const double h0 = tr.hamiltonian_log.front();
  for (int i = 1; i <= n; ++i) {
    const Vec4 k1 = ham_field(L, y);
    const Vec4 k2 = ham_field(L, y + 0.5 * h * k1);
    const Vec4 k3 = ham_field(L, y + 0.5 * h * k2);
    const Vec4 k4 = ham_field(L, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_state(y);
    if (i % every == 0 || i == n) {
      push(i * h);
      audit_energy(h0, tr.hamiltonian_log.back(), i * h, opt);
    }
  }
  return tr;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x1,x2,v1,v2,lift1,lift2,E\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& s = traj.states[i];
    const auto& l = traj.lifts[i];
    fmt::print(os, "{},{},{},{},{},{},{},{}\n", traj.times[i], s.point.x(0), s.point.x(1), s.v(0), s.v(1),
               l.x(0), l.x(1), traj.energy_log[i]);
  }
}

}  // namespace amlab
