#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amlab/flow.hpp"
#include "amlab/graph.hpp"

namespace amlab {

struct LevelSamplingOptions {
  std::size_t count = 10000;
  /// accept |E - c| <= band before projecting
  double band = 1e-3;
  std::uint64_t seed = 1;
  /// draws per parallel chunk
  std::size_t chunk = 200000;
  std::size_t max_draws = 400000000;
};

/// Rejection samples of the energy level from the box [0,1)^2 x [-V,V]^2,
/// then Newton steps along grad E. Throws invalid-input on an empty level.
std::vector<PhasePoint> sample_level(const TonelliLagrangian& L, double c, const LevelSamplingOptions& opt = {});

/// Euclidean distance in (x mod 1, v) with the seam-minimal x difference.
double phase_distance(const PhasePoint& a, const PhasePoint& b);

struct CoveringOptions {
  LevelSamplingOptions sampling;
  std::vector<double> t_grid{20, 25, 30, 35, 40};
  std::vector<double> delta_grid{0.5, 0.35, 0.25};
  double dt = 0.02;
  /// spacing of the stored samples used for ball membership
  double sample_dt = 0.1;
  /// a cover using more than this fraction of the samples is resolution-limited
  double saturation = 0.5;
};

struct CoveringRow {
  double delta = 0.0;
  /// N_delta(T) on the t grid
  std::vector<std::size_t> counts;
  double slope = 0.0;
  bool resolution_limited = false;
};

struct LyapunovOptions {
  int orbits = 8;
  double t_total = 200.0;
  double renorm_dt = 1.0;
  double dt = 0.01;
  /// the estimate uses the stretch after this fraction of t_total
  double burn_in = 0.5;
  /// -1 runs the time-reversed flow
  int direction = 1;
  /// allowed |E(t) - c| per unit time
  double drift_budget = 1e-6;
  std::uint64_t seed = 1;
  LevelSamplingOptions sampling{64};
};

struct LyapunovRun {
  PhasePoint start;
  double exponent = 0.0;
  /// running estimate after each renormalization past the burn-in
  std::vector<double> series;
  bool valid = true;
};

struct HorseshoeData {
  Cycle cycle;
  int m = 0;
  double t_cycle = 0.0;
};

struct EntropyReport {
  double c = 0.0;
  /// covering | lyapunov | horseshoe
  std::string method;
  double estimate = 0.0;
  std::string status = "ok";
  bool certificate = false;
  std::vector<CoveringRow> covering;
  std::vector<double> t_grid;
  std::vector<LyapunovRun> lyapunov;
  std::optional<HorseshoeData> horseshoe;
  std::vector<std::string> notes;
};

EntropyReport covering_entropy(const TonelliLagrangian& L, double c, const CoveringOptions& opt = {});

/// Exponent along one orbit, from a fixed initial tangent vector.
LyapunovRun lyapunov_from(const TonelliLagrangian& L, const PhasePoint& start, const Vec4& tangent,
                          const LyapunovOptions& opt = {});

/// Max over level samples of the finite-time largest exponent. Throws
/// insufficient-data when fewer than half of the orbits keep their energy.
EntropyReport lyapunov_exponent(const TonelliLagrangian& L, double c, const LyapunovOptions& opt = {});

/// log m / t_cycle over the shortest cycle of the graph. A heuristic scale;
/// the cycle itself is the certificate. Throws inapplicable without one.
EntropyReport horseshoe_bound(const ConnectionGraph& g, double c);

void write_covering_csv(std::ostream& os, const EntropyReport& r);
void write_lyapunov_csv(std::ostream& os, const EntropyReport& r);

}  // namespace amlab
