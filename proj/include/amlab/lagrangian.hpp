#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amlab/core.hpp"
#include "amlab/fourier.hpp"

namespace amlab {

enum class Family { FlatKinetic, Mechanical, Magnetic, CustomFourier };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

/// Coefficient tables of a Lagrangian
///   L(x,v) = 1/2 v^T G(x) v + A(x).v - U(x) + 1/4 Q(x) |v|^4.
/// Unset metric entries default to the identity; Q is only accepted for the
/// custom-fourier family.
struct LagrangianData {
  Family family = Family::FlatKinetic;
  FourierSeries g11, g12, g22;
  FourierSeries potential;
  FourierSeries a1, a2;
  FourierSeries quartic;
  int max_harmonic = 4;
};

struct Jet {
  double L = 0.0;
  Vec2 Lx = Vec2::Zero();
  Vec2 Lv = Vec2::Zero();
  Mat2 Lvv = Mat2::Zero();
  /// Lvx(i,j) = d^2 L / dv_i dx_j
  Mat2 Lvx = Mat2::Zero();
  Mat2 Lxx = Mat2::Zero();
};

class TonelliLagrangian {
 public:
  explicit TonelliLagrangian(LagrangianData data);

  static TonelliLagrangian flat();
  static TonelliLagrangian mechanical(FourierSeries potential);
  /// U = eps (cos 2pi x1 + cos 2pi x2)
  static TonelliLagrangian standard_mechanical(double eps);
  static TonelliLagrangian magnetic(FourierSeries a1, FourierSeries a2, FourierSeries potential = {});

  const LagrangianData& data() const { return data_; }
  Family family() const { return data_.family; }

  /// Copy with the constant -k added to L (k added to U).
  TonelliLagrangian shifted(double k) const;

  double value(const Vec2& x, const Vec2& v) const;
  Jet jet(const Vec2& x, const Vec2& v) const;
  double potential(const Vec2& x) const;
  Mat2 metric(const Vec2& x) const;

  /// Euler-Lagrange acceleration; throws ill-conditioned when the fiber
  /// Hessian has condition number above 1e8.
  Vec2 acceleration(const Vec2& x, const Vec2& v) const;

  /// Jacobian of (x,v) -> (v, acceleration) as a 4x4 matrix.
  Mat4 flow_jacobian(const Vec2& x, const Vec2& v) const;

  /// Acceleration for an arbitrary scalar type; no conditioning check.
  template <class S>
  Eigen::Matrix<S, 2, 1> acceleration_t(const Eigen::Matrix<S, 2, 1>& x,
                                        const Eigen::Matrix<S, 2, 1>& v) const;

 private:
  LagrangianData data_;
  bool flat_metric_ = true;
  bool has_magnetic_ = false;
  bool has_quartic_ = false;
};

double eval_L(const TonelliLagrangian& L, const TangentState& s);
double energy(const TonelliLagrangian& L, const TangentState& s);
double energy(const TonelliLagrangian& L, const Vec2& x, const Vec2& v);
CotangentState legendre(const TonelliLagrangian& L, const TangentState& s);
TangentState inverse_legendre(const TonelliLagrangian& L, const CotangentState& c);
/// Fiber inverse at a lifted position.
Vec2 inverse_legendre_v(const TonelliLagrangian& L, const Vec2& x, const Vec2& p);
double hamiltonian(const TonelliLagrangian& L, const CotangentState& c);

struct ValidationGrid {
  int base_points = 32;  // per axis
  int speeds = 8;
  int directions = 8;
  double speed_cap = 20.0;
  double fd_step = 1e-5;
};

struct ValidationReport {
  double min_hessian_eigenvalue = 0.0;
  /// min over x and direction of L(x, r u)/r, one entry per speed r
  std::vector<double> superlinearity;
  bool superlinear = false;
  double max_derivative_mismatch = 0.0;
  int states_checked = 0;
};

/// Throws not-tonelli on a convexity violation and inconsistent-derivatives
/// when analytic and finite-difference derivatives disagree by more than
/// 1e-5 (relative).
ValidationReport validate_tonelli(const TonelliLagrangian& L, const ValidationGrid& grid = {});

// ---------------------------------------------------------------------------

template <class S>
Eigen::Matrix<S, 2, 1> TonelliLagrangian::acceleration_t(const Eigen::Matrix<S, 2, 1>& x,
                                                         const Eigen::Matrix<S, 2, 1>& v) const {
  using Vec = Eigen::Matrix<S, 2, 1>;
  S g11 = S(1.0), g12 = S(0.0), g22 = S(1.0);
  S dg11[2] = {S(0.0), S(0.0)}, dg12[2] = {S(0.0), S(0.0)}, dg22[2] = {S(0.0), S(0.0)};
  if (!flat_metric_) {
    data_.g11.value_grad(x(0), x(1), g11, dg11[0], dg11[1]);
    data_.g12.value_grad(x(0), x(1), g12, dg12[0], dg12[1]);
    data_.g22.value_grad(x(0), x(1), g22, dg22[0], dg22[1]);
  }
  S u, du[2];
  data_.potential.value_grad(x(0), x(1), u, du[0], du[1]);
  S a1 = S(0.0), a2 = S(0.0), da1[2] = {S(0.0), S(0.0)}, da2[2] = {S(0.0), S(0.0)};
  if (has_magnetic_) {
    data_.a1.value_grad(x(0), x(1), a1, da1[0], da1[1]);
    data_.a2.value_grad(x(0), x(1), a2, da2[0], da2[1]);
  }
  S q = S(0.0), dq[2] = {S(0.0), S(0.0)};
  if (has_quartic_) data_.quartic.value_grad(x(0), x(1), q, dq[0], dq[1]);

  const S s = v(0) * v(0) + v(1) * v(1);
  // right-hand side Lx - Lvx v
  Vec rhs;
  for (int j = 0; j < 2; ++j) {
    const S dGv0 = dg11[j] * v(0) + dg12[j] * v(1);
    const S dGv1 = dg12[j] * v(0) + dg22[j] * v(1);
    rhs(j) = 0.5 * (v(0) * dGv0 + v(1) * dGv1) + da1[j] * v(0) + da2[j] * v(1) - du[j] +
             0.25 * dq[j] * s * s;
  }
  for (int i = 0; i < 2; ++i) {
    S acc = S(0.0);
    for (int j = 0; j < 2; ++j) {
      const S dGv_i = i == 0 ? dg11[j] * v(0) + dg12[j] * v(1) : dg12[j] * v(0) + dg22[j] * v(1);
      const S dA_i = i == 0 ? da1[j] : da2[j];
      acc += (dGv_i + dA_i + dq[j] * s * v(i)) * v(j);
    }
    rhs(i) -= acc;
  }
  const S h11 = g11 + q * (s + 2.0 * v(0) * v(0));
  const S h12 = g12 + q * (2.0 * v(0) * v(1));
  const S h22 = g22 + q * (s + 2.0 * v(1) * v(1));
  const S det = h11 * h22 - h12 * h12;
  Vec a;
  a(0) = (h22 * rhs(0) - h12 * rhs(1)) / det;
  a(1) = (h11 * rhs(1) - h12 * rhs(0)) / det;
  return a;
}

}  // namespace amlab
