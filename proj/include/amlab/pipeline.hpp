#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amlab/config.hpp"

namespace amlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNotTonelli = 2,
  kExitSubcritical = 3,
  /// a numerical stage failed (no certificate claim either way)
  kExitNumerical = 4,
};

struct RunOptions {
  std::string out = "out";
  bool resume = false;
  int workers = 1;
};

struct StageRecord {
  std::string name;
  /// ok | failed | skipped | hypothesis-failed
  std::string status = "ok";
  std::string detail;
  bool cache_hit = false;
  double seconds = 0.0;
};

struct PipelineResult {
  int exit_code = kExitOk;
  bool certificate = false;
  std::vector<StageRecord> stages;
  /// contents of manifest.json
  json manifest;
};

/// validate -> critical-value -> omega-search -> proxy -> barrier -> classify
/// -> graph (with the double-cover pass) -> entropy. Stage payloads are
/// cached under out/cache/<config hash>/ and reused with `resume`.
PipelineResult run_pipeline(const ExperimentConfig& cfg, const RunOptions& opt);

/// Tonelli check only; writes validation.json.
int run_validate(const ExperimentConfig& cfg, const RunOptions& opt);
/// beta.csv over the configured rational grid.
int run_beta(const ExperimentConfig& cfg, const RunOptions& opt);
/// alpha.csv over the cross-check grid and any extra classes.
int run_alpha(const ExperimentConfig& cfg, const RunOptions& opt, const std::vector<Vec2>& extra);
/// entropy.json with the covering and Lyapunov estimates at the configured energy.
int run_entropy(const ExperimentConfig& cfg, const RunOptions& opt);

struct SweepRow {
  std::string value;
  int exit_code = 0;
  double c0 = 0.0;
  bool certificate = false;
  double covering = 0.0;
  double lyapunov = 0.0;
  double horseshoe = 0.0;
};

/// One pipeline per value of the dotted parameter path, each in its own
/// subdirectory, plus summary.csv. Failures are recorded and the sweep goes on.
std::vector<SweepRow> run_sweep(const ExperimentConfig& base, const std::string& path, const std::vector<json>& values,
                                const RunOptions& opt);

/// Writes through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace amlab
