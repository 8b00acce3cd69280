#pragma once

#include <string>
#include <vector>

#include "amlab/orbits.hpp"

namespace amlab {

enum class Branch { Unstable, Stable };
const char* to_string(Branch b);

struct ManifoldOptions {
  double eps0 = 1e-5;
  /// maximal distance between consecutive curve points
  double spacing = 0.01;
  /// fundamental-domain iterates
  int max_steps = 12;
  int max_points = 8000;
  /// stop adding iterates once the curve is this long
  double max_length = 3.0;
  ReturnOptions ret{2e-3, 50.0};
};

/// Branch of a stable or unstable curve of a hyperbolic fixed point of the
/// return map, as a polyline in section coordinates (s is not reduced).
struct ManifoldCurve {
  Branch branch = Branch::Unstable;
  int sign = 1;
  Vec2 fixed_point = Vec2::Zero();
  /// expanding multiplier of the map used (|lambda| or lambda^2)
  double lambda = 1.0;
  Vec2 direction = Vec2::Zero();
  std::vector<Vec2> points;
  /// flow time from the seed segment
  std::vector<double> ages;
  /// level + fundamental-domain parameter
  std::vector<double> params;
  int levels = 0;
  bool truncated = false;
  std::string status = "ok";

  double max_spacing() const;
  double length() const;
  /// the curve translated by dz (same orbit on another lift)
  ManifoldCurve shifted(const Vec2& dz) const;
};

/// Eigen-direction of the return-map derivative for the branch, normalized
/// with a positive leading component.
Vec2 eigendirection(const Mat2& dp, Branch branch, double* multiplier = nullptr);

ManifoldCurve globalize_manifold(const TonelliLagrangian& L, const PeriodicOrbit& orbit, Branch branch, int sign,
                                 const ManifoldOptions& opt = {});

struct Crossing {
  Vec2 point = Vec2::Zero();
  /// angle between the curves, in [0, pi/2]
  double angle = 0.0;
  double age_unstable = 0.0;
  double age_stable = 0.0;
  /// lattice shift applied to the stable curve (multiple of the s period)
  double shift = 0.0;
  bool transverse = false;
};

struct IntersectionOptions {
  double min_angle = 1e-2;
  /// crossings this close to a fixed point are the trivial ones
  double exclusion = 1e-3;
  bool zero_shift_only = false;
};

/// Crossings of an unstable curve with a stable curve, including shifts of
/// the stable curve by multiples of the s period. Tangents come from the
/// cubic through the four nearest points.
std::vector<Crossing> find_crossings(const ManifoldCurve& unstable, const ManifoldCurve& stable, double s_period,
                                     const std::vector<Vec2>& fixed_points, const IntersectionOptions& opt = {});

}  // namespace amlab
