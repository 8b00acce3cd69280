#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "amlab/core.hpp"

namespace amlab {

/// a*cos(2pi(m x1 + n x2)) + b*sin(2pi(m x1 + n x2))
struct FourierTerm {
  int m = 0;
  int n = 0;
  double a = 0.0;
  double b = 0.0;
  bool operator==(const FourierTerm&) const = default;
};

/// Real truncated Fourier series on the unit torus. Coefficients are
/// multiplied by `scale`, which keeps perturbation sweeps a one-number edit.
class FourierSeries {
 public:
  struct Jet {
    double f = 0.0;
    Vec2 grad = Vec2::Zero();
    Mat2 hess = Mat2::Zero();
  };

  FourierSeries() = default;
  explicit FourierSeries(std::vector<FourierTerm> terms, double scale = 1.0);

  static FourierSeries constant(double c) { return FourierSeries({{0, 0, c, 0.0}}); }

  bool empty() const { return terms_.empty(); }
  bool is_constant() const;
  int max_harmonic() const;
  double scale() const { return scale_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }
  FourierSeries with_scale(double s) const { return FourierSeries(terms_, s); }

  double value(const Vec2& x) const;
  Jet jet(const Vec2& x) const;

  /// Value and gradient for an arbitrary scalar type (used with automatic
  /// differentiation).
  template <class S>
  void value_grad(const S& x1, const S& x2, S& f, S& g1, S& g2) const {
    using std::cos;
    using std::sin;
    constexpr double tau = 2.0 * std::numbers::pi;
    f = S(0.0);
    g1 = S(0.0);
    g2 = S(0.0);
    for (const auto& t : terms_) {
      const double a = scale_ * t.a;
      const double b = scale_ * t.b;
      if (t.m == 0 && t.n == 0) {
        f += a;
        continue;
      }
      const S phase = tau * (double(t.m) * x1 + double(t.n) * x2);
      const S c = cos(phase);
      const S s = sin(phase);
      f += a * c + b * s;
      const S d = tau * (b * c - a * s);
      g1 += double(t.m) * d;
      g2 += double(t.n) * d;
    }
  }

  bool operator==(const FourierSeries&) const = default;

 private:
  std::vector<FourierTerm> terms_;
  double scale_ = 1.0;
};

}  // namespace amlab
