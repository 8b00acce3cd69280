#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "amlab/lagrangian.hpp"
#include "amlab/manifolds.hpp"
#include "amlab/mather.hpp"

namespace amlab {

using json = nlohmann::json;

/// Malformed configuration; `field` is the dotted path of the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(ErrorKind::InvalidInput, field.empty() ? what : "field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct SolverConfig {
  double dt = 1e-3;
  double newton_tol = 1e-8;
  int newton_max_iter = 200;
  int beta_starts = 4;
  int proxy_starts = 32;
  int nodes_per_time = 64;
  double margin = 1e-3;
};

struct EntropyConfig {
  std::size_t samples = 10000;
  std::vector<double> t_grid{20, 25, 30, 35, 40};
  std::vector<double> delta_grid{0.5, 0.35, 0.25};
  double covering_dt = 0.02;
  int lyapunov_orbits = 8;
  double lyapunov_time = 200.0;
  double renorm_dt = 1.0;
};

struct BarrierConfig {
  double t_min = 5.0;
  double t_max = 40.0;
  int t_points = 8;
  /// barrier points per proxy orbit
  int orbit_points = 4;
};

struct ExperimentConfig {
  LagrangianData lagrangian;
  double energy = 0.0;
  IntClass h0{0, 1};
  std::uint64_t seed = 1;
  SolverConfig solver;
  GridSpec grid{4, 3, 4.0};
  ManifoldOptions manifold;
  EntropyConfig entropy;
  BarrierConfig barrier;
  /// canonical form of the input document
  json canonical;

  TonelliLagrangian make_lagrangian() const { return TonelliLagrangian(lagrangian); }
};

/// Strict parse: duplicate or unknown keys, wrong types and non-positive
/// tolerances are config errors naming the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json(const json& doc);

/// Sorted keys, no whitespace.
std::string canonical_text(const json& doc);
std::string sha256_hex(const std::string& data);
/// Hash of the canonical form with the seed folded in.
std::string config_hash(const ExperimentConfig& cfg);

/// Sets a value by dotted path ("lagrangian.scale"); the parent must exist.
json with_value(const json& doc, const std::string& path, const json& value);

}  // namespace amlab
