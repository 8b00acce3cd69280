#pragma once

#include <optional>

#include "amlab/core.hpp"
#include "amlab/flow.hpp"
#include "amlab/lagrangian.hpp"

namespace amlab {

/// Transversal section {<m, x> = sigma0 mod 1} in the energy level E = c for
/// orbits of primitive class kappa with <m, kappa> = 1. Section coordinates
/// are z = (s, p_t): s = <m_perp, x>/|m_perp|^2 along the section line and
/// p_t the momentum along it; the normal momentum follows from H = c. In
/// these coordinates the return map preserves area.
struct Section {
  Eigen::Vector2i m{0, 1};
  IntClass kappa{0, 1};
  double sigma0 = 0.0;
  double energy = 0.0;
  CellPeriods periods;

  Vec2 normal() const { return Vec2(m(0), m(1)); }
  Vec2 mperp() const { return Vec2(m(1), -m(0)); }
  Vec2 tangent() const { return mperp().normalized(); }
  Vec2 unit_normal() const { return normal().normalized(); }
  double sigma(const Vec2& x) const { return normal().dot(x); }
  /// period of the s coordinate on the configured torus
  double s_period() const;

  Vec2 position(double s) const;

  /// Phase point on the section line sigma0 for coordinates z; the normal
  /// momentum is the root of H = c with forward crossing. Empty when the
  /// level has no such point.
  std::optional<PhasePoint> lift(const TonelliLagrangian& L, const Vec2& z, double pn_guess) const;

  /// Section coordinates of a phase point lying on a line sigma0 + k.
  Vec2 project(const TonelliLagrangian& L, const PhasePoint& y) const;

  /// Normal momentum of a phase point, used as a Newton guess.
  double normal_momentum(const TonelliLagrangian& L, const PhasePoint& y) const;
};

/// Builds the section for class kappa through (x, v): m is the integer
/// covector with <m, kappa> = 1 best aligned with v. Throws inapplicable
/// for zero or non-primitive classes.
Section make_section(IntClass kappa, const Vec2& x, const Vec2& v, double energy, CellPeriods periods = {});

struct ReturnOptions {
  double dt = 1e-3;
  /// give up when no return happens within this time
  double t_max = 50.0;
};

struct ReturnResult {
  Vec2 z = Vec2::Zero();
  double time = 0.0;
  PhasePoint start;
  PhasePoint end;
  /// dz'/dz, filled when requested
  Mat2 jacobian = Mat2::Identity();
  /// full 4x4 linearized flow up to the return
  Mat4 frame = Mat4::Identity();
};

/// Forward (direction +1) or backward (-1) return map. Empty when the point
/// has no section lift or escapes (no return within t_max).
std::optional<ReturnResult> section_return(const TonelliLagrangian& L, const Section& sec, const Vec2& z,
                                           int direction, double pn_guess, bool with_jacobian,
                                           const ReturnOptions& opt = {});

}  // namespace amlab
