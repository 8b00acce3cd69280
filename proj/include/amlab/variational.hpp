#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "amlab/core.hpp"
#include "amlab/flow.hpp"
#include "amlab/lagrangian.hpp"
#include "amlab/path_solver.hpp"

namespace amlab {

/// Midpoint-rule action of (L - omega + k) over the loop. The omega part is
/// the exact pairing with the loop's class.
double discrete_action(const TonelliLagrangian& L, const DiscreteLoop& loop, const CohomologyClass& omega,
                       double k_offset = 0.0);

/// Gradient sup-norm of the discrete action at the loop.
double loop_gradient_norm(const TonelliLagrangian& L, const DiscreteLoop& loop, const CohomologyClass& omega);

struct PeriodMode {
  bool free = false;
  /// fixed period, or the starting guess when free
  double period = 1.0;
  double t_min = 0.05;
  double t_max = 50.0;

  static PeriodMode fixed(double T) { return {false, T}; }
  static PeriodMode search(double lo, double hi) { return {true, std::sqrt(lo * hi), lo, hi}; }
};

struct LoopOptions {
  int nodes = 64;
  double jitter = 0.01;
  double k_offset = 0.0;
  NewtonOptions newton;
};

struct LoopMinimum {
  DiscreteLoop loop;
  double action = 0.0;
  double seed_action = 0.0;
  double grad_norm = 0.0;
  /// discrete Euler-Lagrange residual, max |dS/dy_i| / h
  double residual = 0.0;
  bool collapsed = false;
  /// free period: minimizer found strictly inside the search range
  bool interior = true;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, LoopMinimum best)
      : Error(ErrorKind::Convergence, what), best_(std::move(best)) {}
  const LoopMinimum& best() const { return best_; }

 private:
  LoopMinimum best_;
};

/// Minimizes the action of loops in the class. The seed loop is a straight
/// line from a random base point with random jitter drawn from `seed`.
LoopMinimum minimize_loop(const TonelliLagrangian& L, IntClass homology, const CohomologyClass& omega,
                          const PeriodMode& mode, std::uint64_t seed, const LoopOptions& opt = {});

/// Fixed-period minimization from a given loop.
LoopMinimum minimize_loop_from(const TonelliLagrangian& L, const DiscreteLoop& start, const CohomologyClass& omega,
                               const LoopOptions& opt = {});

/// Free-period minimization over log T from a given loop.
LoopMinimum minimize_loop_free_from(const TonelliLagrangian& L, const DiscreteLoop& start,
                                    const CohomologyClass& omega, double t_min, double t_max,
                                    const LoopOptions& opt = {});

struct PotentialOptions {
  double h0 = 0.05;
  bool richardson = true;
  NewtonOptions newton{1e-10, 200};
};

struct PotentialResult {
  double value = 0.0;
  double coarse = 0.0;
  double fine = 0.0;
  int segments = 0;
  /// lifted endpoint of the best start
  Vec2 target = Vec2::Zero();
  std::vector<Vec2> path;
};

/// Minimal (L - omega)-action of a path from the lift x to the lift y in
/// time t at N segments.
double potential_at_resolution(const TonelliLagrangian& L, const Vec2& x, const Vec2& y, double t,
                               const CohomologyClass& omega, int segments, const NewtonOptions& newton = {},
                               std::vector<Vec2>* path = nullptr);

/// Action potential Phi_omega(x, y, t): multi-start over the 9 lattice
/// translates of y around the translate with the lowest straight-line
/// action, then Richardson extrapolation (4 S_2N - S_N)/3.
PotentialResult action_potential(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y, double t,
                                 const CohomologyClass& omega, const PotentialOptions& opt = {});

std::vector<double> geometric_grid(double lo, double hi, int n);

struct BarrierSample {
  TorusPoint x, y;
  CohomologyClass omega;
  double alpha = 0.0;
  std::vector<double> t_grid;
  /// Phi(x,y,t) + alpha t; NaN where the minimization failed
  std::vector<double> values;
  /// cumulative minimum of `values` along the grid
  std::vector<double> running;
  /// minimum over the tail half of the grid
  double running_min = 0.0;
  int failures = 0;
};

BarrierSample peierls_barrier(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y,
                              const CohomologyClass& omega, double alpha, const std::vector<double>& t_grid,
                              const PotentialOptions& opt = {});

double aubry_semidistance(const TonelliLagrangian& L, const TorusPoint& x, const TorusPoint& y,
                          const CohomologyClass& omega, double alpha, const std::vector<double>& t_grid,
                          const PotentialOptions& opt = {});

/// A_{L - omega + alpha}(segment) - min_t {Phi(start, end, t) + alpha t}
/// with t over a grid around the segment duration.
double semistatic_residual(const TonelliLagrangian& L, const Trajectory& segment, const CohomologyClass& omega,
                           double alpha, const PotentialOptions& opt = {});

/// Action of (L - omega + alpha) along sampled trajectory data (trapezoid rule).
double trajectory_action(const TonelliLagrangian& L, const Trajectory& segment, const CohomologyClass& omega,
                         double alpha);

/// CSV rows x1,x2,y1,y2,t,phi_plus_alpha_t,running_min for one barrier sample.
void write_barrier_csv(std::ostream& os, const BarrierSample& b, bool header = true);

}  // namespace amlab
