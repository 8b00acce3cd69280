#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>

#include "amlab/core.hpp"
#include "amlab/flow.hpp"
#include "amlab/lagrangian.hpp"
#include "amlab/section.hpp"

namespace amlab {

enum class Stability { Hyperbolic, Elliptic, Degenerate, Uncertain };
const char* to_string(Stability s);

struct ClassifyOptions {
  double tol_hyperbolic = 1e-4;
  double tol_elliptic = 1e-4;
  /// |det DP - 1| above this makes the multipliers untrustworthy
  double det_tol = 1e-6;
};

struct FloquetPair {
  std::array<std::complex<double>, 2> lambda;
  Stability stability = Stability::Uncertain;
};

FloquetPair classify(const Mat2& reduced, const ClassifyOptions& opt = {});

struct PeriodicOrbit {
  /// lifted seed on the section
  PhasePoint seed;
  double period = 0.0;
  IntClass homology;
  double energy = 0.0;
  Section section;
  /// fixed point of the return map in section coordinates
  Vec2 z = Vec2::Zero();
  double pn = 0.0;
  /// linearized flow over one period (4x4)
  Mat4 monodromy = Mat4::Identity();
  /// derivative of the return map (the monodromy with the flow and energy
  /// directions removed)
  Mat2 reduced = Mat2::Identity();
  FloquetPair floquet;
  /// |P(z) - z| at convergence
  double residual = 0.0;
  /// |phi_T(seed) - seed - kappa| in phase space
  double closure_gap = 0.0;
  int iterations = 0;
};

struct RefineOptions {
  /// energy level; defaults to the mean discrete energy of the candidate
  std::optional<double> energy;
  double dt = 1e-3;
  double tol = 1e-10;
  int max_iter = 40;
  CellPeriods periods;
  ClassifyOptions classify;
};

/// Mean energy of the discrete loop (midpoints and difference quotients).
double loop_energy(const TonelliLagrangian& L, const DiscreteLoop& loop);

/// Refines a discrete loop of primitive class into a periodic orbit of the
/// flow by Newton's method on the section return map. Singular directions
/// (families of orbits) are handled by a minimum-norm step.
PeriodicOrbit refine_orbit(const TonelliLagrangian& L, const DiscreteLoop& candidate, const RefineOptions& opt = {});

/// Refinement from a section and a guess in section coordinates.
PeriodicOrbit refine_on_section(const TonelliLagrangian& L, const Section& sec, const Vec2& z0, double pn_guess,
                                const RefineOptions& opt = {});

/// Orbit sampled over one period.
Trajectory orbit_trajectory(const TonelliLagrangian& L, const PeriodicOrbit& orbit, double dt = 1e-3);

/// The orbit as a discrete loop with n nodes.
DiscreteLoop orbit_loop(const TonelliLagrangian& L, const PeriodicOrbit& orbit, int n, double dt = 1e-3);

/// The same orbit re-found on another section of its class.
PeriodicOrbit resection(const TonelliLagrangian& L, const PeriodicOrbit& orbit, const Section& target,
                        const RefineOptions& opt = {});

/// Same orbit translated by an integer vector (a different lift, or a
/// different copy on a finite cover).
PeriodicOrbit translated(const TonelliLagrangian& L, const PeriodicOrbit& orbit, const Vec2& shift,
                         const Section& target);

}  // namespace amlab
