#include "amlab/cover.hpp"

#include <cmath>

namespace amlab {

double CoverLagrangian::value(const TorusPoint& x, const Vec2& v) const { return base_.value(x.x, v); }

TorusPoint CoverLagrangian::project(const TorusPoint& x) const { return amlab::wrap(x.x); }

TorusPoint CoverLagrangian::wrap(const Vec2& x) const { return amlab::wrap(x, periods()); }

IntClass CoverLagrangian::to_base(IntClass c) { return {2 * c.k, c.l}; }

std::optional<IntClass> CoverLagrangian::to_cover(IntClass c) {
  if (c.k % 2 != 0) return std::nullopt;
  return IntClass{c.k / 2, c.l};
}

std::array<PeriodicOrbit, 2> CoverLagrangian::lift(const PeriodicOrbit& orbit) const {
  if (!to_cover(orbit.homology))
    throw Error(ErrorKind::Inapplicable, "double cover: the orbit class does not lift to a closed orbit");
  PeriodicOrbit a = orbit;
  a.section.periods = periods();
  return {a, translated(base_, a, Vec2(1, 0), a.section)};
}

CoverLagrangian lift_to_double_cover(const TonelliLagrangian& L) { return CoverLagrangian(L); }

}  // namespace amlab
