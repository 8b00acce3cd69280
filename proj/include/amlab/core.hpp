#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "amlab/error.hpp"

namespace amlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Periods of the configuration torus R^2 / (p1 Z x p2 Z). The base torus is
/// (1, 1); the double cover used for homoclinic searches is (2, 1).
struct CellPeriods {
  int p1 = 1;
  int p2 = 1;

  Vec2 as_vec() const { return {double(p1), double(p2)}; }
  bool operator==(const CellPeriods&) const = default;
};

/// Point of the torus, stored as its representative in [0,p1) x [0,p2).
struct TorusPoint {
  Vec2 x = Vec2::Zero();
};

/// Point of the universal cover R^2.
struct LiftedPoint {
  Vec2 x = Vec2::Zero();
};

struct TangentState {
  TorusPoint point;
  Vec2 v = Vec2::Zero();
};

struct CotangentState {
  TorusPoint point;
  Vec2 p = Vec2::Zero();
};

/// Integral homology class (k, l) in H_1(T^2, Z).
struct IntClass {
  std::int64_t k = 0;
  std::int64_t l = 0;

  Vec2 as_vec() const { return {double(k), double(l)}; }
  bool is_zero() const { return k == 0 && l == 0; }
  bool operator==(const IntClass&) const = default;
};

/// Real homology class; `integral` is set exactly when both components are
/// integers, in which case `as_int()` recovers them.
struct HomologyClass {
  Vec2 h = Vec2::Zero();

  static HomologyClass from_int(IntClass c) { return {c.as_vec()}; }
  bool integral() const;
  IntClass as_int() const;
};

/// Constant 1-form w1 dx1 + w2 dx2 representing a class in H^1(T^2, R).
struct CohomologyClass {
  Vec2 w = Vec2::Zero();
};

inline double pairing(const CohomologyClass& omega, const HomologyClass& h) {
  return omega.w(0) * h.h(0) + omega.w(1) * h.h(1);
}
inline double pairing(const CohomologyClass& omega, const IntClass& c) {
  return omega.w(0) * double(c.k) + omega.w(1) * double(c.l);
}

std::int64_t gcd(std::int64_t a, std::int64_t b);
/// Bezout coefficients: a*x + b*y = gcd(a, b) >= 0.
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y);

/// Closed discrete curve with N nodes on a uniform time grid of step T/N.
/// The closing node is implicit: node(N) = node(0) + homology, so the
/// displacement of the loop is an exact integer vector.
class DiscreteLoop {
 public:
  static constexpr int kMinNodes = 8;

  DiscreteLoop(std::vector<Vec2> nodes, double period, IntClass homology);

  /// Straight loop x0 + (i/N) * homology, i = 0..N-1.
  static DiscreteLoop straight(const Vec2& x0, IntClass homology, double period, int n);

  int size() const { return int(nodes_.size()); }
  double period() const { return period_; }
  double step() const { return period_ / double(nodes_.size()); }
  const IntClass& homology() const { return homology_; }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  /// Node with index i in Z, using the deck transformation of the class.
  Vec2 node(std::int64_t i) const;

  /// Cyclic relabeling: node j of the result is node(j + shift).
  DiscreteLoop rotated(int shift) const;
  DiscreteLoop with_period(double period) const;

 private:
  std::vector<Vec2> nodes_;
  double period_;
  IntClass homology_;
};

TorusPoint wrap(const LiftedPoint& p, CellPeriods periods = {});
inline TorusPoint wrap(const Vec2& p, CellPeriods periods = {}) { return wrap(LiftedPoint{p}, periods); }

/// Displacement b - a reduced to the representative with each coordinate in
/// [-p/2, p/2).
Vec2 minimal_displacement(const Vec2& a, const Vec2& b, CellPeriods periods = {});

/// Lift of a torus trajectory to the cover starting from `initial`. Each step
/// uses the minimal displacement; a step of half a period or more in some
/// coordinate is ambiguous and rejected.
std::vector<LiftedPoint> continuous_lift(std::span<const TorusPoint> trajectory,
                                         const LiftedPoint& initial, CellPeriods periods = {});

/// Resamples a loop to M nodes by linear interpolation in the loop
/// parameter. Class and period are unchanged.
DiscreteLoop resample_loop(const DiscreteLoop& loop, int m);

/// Hausdorff distance between the images of two loops on the torus, using
/// the polylines through the nodes and minimal lattice translates.
double loop_distance(const DiscreteLoop& a, const DiscreteLoop& b, CellPeriods periods = {});

bool all_finite(const Vec2& v);

}  // namespace amlab
