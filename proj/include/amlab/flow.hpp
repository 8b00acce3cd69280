#pragma once

#include <iosfwd>
#include <vector>

#include "amlab/core.hpp"
#include "amlab/lagrangian.hpp"

namespace amlab {

/// Phase point on the universal cover: lifted position and velocity.
struct PhasePoint {
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();

  Vec4 as_vec() const { return {x(0), x(1), v(0), v(1)}; }
  static PhasePoint from_vec(const Vec4& y) { return {y.head<2>(), y.tail<2>()}; }
};

/// Sampled orbit. Times run from 0 towards t_final, so they decrease for
/// backward integration.
struct Trajectory {
  std::vector<double> times;
  std::vector<TangentState> states;
  std::vector<LiftedPoint> lifts;
  std::vector<double> energy_log;
  CellPeriods periods;

  double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
  PhasePoint end() const { return {lifts.back().x, states.back().v}; }
};

using TangentFrame = Mat4;

struct FlowOptions {
  /// allowed |E(t) - E(0)| per unit time; a run fails beyond 100x
  double drift_budget = 1e-6;
  /// keep every k-th step in the trajectory
  int sample_every = 1;
  CellPeriods periods;
};

struct VectorField {
  Vec2 velocity;
  Vec2 acceleration;
};

VectorField el_vector_field(const TonelliLagrangian& L, const TangentState& s);

/// One classic fourth-order step of the Euler-Lagrange system.
PhasePoint rk4_step(const TonelliLagrangian& L, const PhasePoint& y, double h);

/// Flow for time t with steps of at most dt, without storing samples.
PhasePoint propagate(const TonelliLagrangian& L, const PhasePoint& y, double t, double dt);

struct FramedPoint {
  PhasePoint point;
  TangentFrame frame = TangentFrame::Identity();
};

/// Flow together with its linearization, integrated as one combined system.
FramedPoint propagate_variational(const TonelliLagrangian& L, const PhasePoint& y, double t, double dt);

Trajectory integrate(const TonelliLagrangian& L, const TangentState& s0, double t_final, double dt,
                     const FlowOptions& opt = {});
Trajectory integrate_lifted(const TonelliLagrangian& L, const PhasePoint& y0, double t_final, double dt,
                            const FlowOptions& opt = {});

struct VariationalResult {
  Trajectory trajectory;
  TangentFrame frame;
  /// det Lvv(start) / det Lvv(end): the exact value of det(frame)
  double expected_det = 1.0;
};

VariationalResult integrate_variational(const TonelliLagrangian& L, const TangentState& s0, double t_final,
                                        double dt, const FlowOptions& opt = {});

/// Time-averaged displacement on the cover. Throws insufficient-data when
/// the duration is below `min_duration`.
HomologyClass rotation_vector(const Trajectory& traj, double min_duration = 10.0);

struct CotangentTrajectory {
  std::vector<double> times;
  std::vector<CotangentState> states;
  std::vector<LiftedPoint> lifts;
  std::vector<double> hamiltonian_log;
};

/// Integrates x' = dH/dp, p' = -dH/dx with dH/dp = v*(x,p) from the fiber
/// inverse and dH/dx = -Lx(x, v*).
CotangentTrajectory hamiltonian_integrate(const TonelliLagrangian& L, const CotangentState& c0, double t_final,
                                          double dt, const FlowOptions& opt = {});

/// CSV with columns t,x1,x2,v1,v2,lift1,lift2,E.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace amlab
