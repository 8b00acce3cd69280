#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "amlab/orbits.hpp"
#include "amlab/variational.hpp"

namespace amlab {

/// Rational class p/n with (p, n) reduced.
struct RationalClass {
  IntClass p;
  std::int64_t n = 1;

  HomologyClass value() const { return {p.as_vec() / double(n)}; }
  static RationalClass reduced(IntClass p, std::int64_t n);
};

struct BetaOptions {
  int starts = 4;
  /// nodes per unit of period, at least `min_nodes`
  int nodes_per_time = 64;
  int min_nodes = 64;
  int max_nodes = 1024;
  std::uint64_t seed = 1;
  NewtonOptions newton;
};

struct BetaSample {
  RationalClass h;
  double beta = 0.0;
  DiscreteLoop witness;
  double witness_period = 0.0;
  /// witness is a rest point
  bool fixed_point = false;
};

/// beta(p/n): minimal average action over loops of class p with period n.
/// For h = 0 the minimum over rest points and short contractible loops.
BetaSample beta_at(const TonelliLagrangian& L, const RationalClass& h, const BetaOptions& opt = {});

struct GridSpec {
  int max_denominator = 4;
  int max_numerator = 3;
  double max_norm = 4.0;
};

/// Distinct reduced rational classes p/n with n <= max_denominator,
/// |p_i| <= max_numerator and |p/n| <= max_norm, in a fixed order.
std::vector<RationalClass> rational_grid(const GridSpec& spec = {});

std::vector<BetaSample> beta_grid(const TonelliLagrangian& L, const std::vector<RationalClass>& grid,
                                  const BetaOptions& opt = {});

struct AlphaSample {
  CohomologyClass omega;
  double alpha = 0.0;
  /// value before the free-period refinement
  double grid_alpha = 0.0;
  DiscreteLoop witness;
  RationalClass argmax;
};

/// alpha(omega) = max over samples of <omega, h> - beta(h), refined by a
/// period search for the minimal average (L - omega)-action in the argmax class.
AlphaSample alpha_at(const TonelliLagrangian& L, const CohomologyClass& omega, const std::vector<BetaSample>& samples,
                     const BetaOptions& opt = {});

/// Largest violation of <omega, h> <= alpha + beta(h) over the samples.
double fenchel_violation(const AlphaSample& a, const std::vector<BetaSample>& samples);

struct CriticalValue {
  double c0 = 0.0;
  /// min of alpha over the cross-check grid
  double min_alpha = 0.0;
  std::vector<AlphaSample> alphas;
  std::optional<std::string> warning;
};

/// c0 = -beta(0), cross-checked against min alpha over a 5x5 omega grid on
/// [-1, 1]^2 built from the given beta samples.
CriticalValue critical_value(const TonelliLagrangian& L, const std::vector<BetaSample>& samples,
                             const BetaOptions& opt = {});
/// Same with a small default grid.
CriticalValue critical_value(const TonelliLagrangian& L, const BetaOptions& opt = {});

struct OmegaOptions {
  double margin = 1e-3;
  double lambda_lo = 0.05;
  double lambda_hi = 20.0;
  int scan_points = 20;
  double energy_tol = 1e-7;
  /// relative step of the lower secant along the lambda line
  double secant_step = 1e-5;
  /// transverse stencil: classes q k0 +- k_perp
  int transverse_q = 8;
  double validation_tol = 1e-3;
  BetaOptions beta;
  RefineOptions refine;
};

struct EnergySample {
  double lambda = 0.0;
  double energy = 0.0;
};

struct OmegaResult {
  explicit OmegaResult(LoopMinimum w) : witness(std::move(w)) {}

  CohomologyClass omega;
  double lambda0 = 0.0;
  /// lambda at which the discrete minimizer has energy c
  double lambda_discrete = 0.0;
  IntClass h0;
  IntClass k0;
  std::int64_t g = 1;
  double energy = 0.0;
  double period = 0.0;
  double alpha = 0.0;
  double validation_gap = 0.0;
  LoopMinimum witness;
  PeriodicOrbit orbit;
  std::vector<EnergySample> scan;
  std::vector<EnergySample> bisection;
  /// every sign change of E - c along the scan, as lambda intervals
  std::vector<std::pair<double, double>> brackets;
};

/// Finds omega0 with alpha(omega0) = c and the minimizer of rotation
/// lambda0 h0 on the energy level c.
OmegaResult omega_for_energy(const TonelliLagrangian& L, double c, IntClass h0, double c0,
                             const OmegaOptions& opt = {});

struct ProxyOptions {
  int starts = 32;
  double cluster_tol = 1e-3;
  double action_tol = 1e-6;
  double energy_tol = 1e-5;
  /// second Hessian eigenvalue below this fraction of the largest marks a family
  double family_tol = 1e-7;
  std::uint64_t seed = 1;
  BetaOptions beta;
  RefineOptions refine;
};

struct ProxyMember {
  PeriodicOrbit orbit;
  DiscreteLoop loop;
  double average_action = 0.0;
  /// |x(T) - x(0) - class| along the refined orbit
  double rotation_residual = 0.0;
};

struct MatherSetProxy {
  CohomologyClass omega;
  double energy = 0.0;
  std::string status = "ok";
  std::vector<ProxyMember> members;
  /// representative loop when the minimizers form a continuum
  std::optional<DiscreteLoop> family;
  int starts_converged = 0;
  int dropped_non_minimizing = 0;
  double hessian_gap = 0.0;
  /// rotation-norm bounds 0 < k <= |rho| <= l from the stored samples
  double k_bound = 0.0;
  double l_bound = 0.0;
  bool bounds_hold = true;
  bool disjoint = true;
  double min_separation = 0.0;
  std::vector<std::string> notes;

  std::size_t count() const { return members.size(); }
};

MatherSetProxy mather_set_proxy(const TonelliLagrangian& L, const OmegaResult& w, const ProxyOptions& opt = {});

void write_beta_csv(std::ostream& os, const std::vector<BetaSample>& samples);
void write_alpha_csv(std::ostream& os, const std::vector<AlphaSample>& samples);

}  // namespace amlab
