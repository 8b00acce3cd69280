#pragma once

#include <array>

#include "amlab/orbits.hpp"

namespace amlab {

/// L on the double cover R^2 / (2Z x Z). Dynamics run in lifted
/// coordinates, so the base evaluators serve the cover unchanged; only
/// wrapping and homology differ.
class CoverLagrangian {
 public:
  explicit CoverLagrangian(TonelliLagrangian base) : base_(std::move(base)) {}

  const TonelliLagrangian& base() const { return base_; }
  CellPeriods periods() const { return {2, 1}; }

  double value(const TorusPoint& x, const Vec2& v) const;
  /// cover cell [0,2) x [0,1) to base cell
  TorusPoint project(const TorusPoint& x) const;
  TorusPoint wrap(const Vec2& x) const;
  /// a cover class (k, l) displaces by (2k, l) in the plane
  static IntClass to_base(IntClass cover);
  /// base class, when it closes on the cover (k even)
  static std::optional<IntClass> to_cover(IntClass base);

  /// The two components of the preimage of a base orbit: itself and its
  /// translate by (1, 0), both sectioned with the cover periods.
  std::array<PeriodicOrbit, 2> lift(const PeriodicOrbit& orbit) const;

 private:
  TonelliLagrangian base_;
};

CoverLagrangian lift_to_double_cover(const TonelliLagrangian& L);

}  // namespace amlab
