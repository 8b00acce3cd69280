#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "amlab/core.hpp"
#include "amlab/lagrangian.hpp"

namespace amlab {

/// Discrete action sum_i h * L((y_i + y_{i+1})/2, (y_{i+1} - y_i)/h) + k*T - <w, y_N - y_0>
/// over either a closed chain (y_N = y_0 + D, all N nodes free) or a chain
/// with fixed endpoints y_0 = a, y_N = b (N-1 interior nodes free).
class PathProblem {
 public:
  static PathProblem loop(const TonelliLagrangian& L, int n, double period, IntClass homology, Vec2 omega,
                          double k_offset);
  static PathProblem fixed(const TonelliLagrangian& L, int n, double duration, Vec2 a, Vec2 b, Vec2 omega,
                           double k_offset);

  bool cyclic() const { return cyclic_; }
  int segments() const { return n_; }
  int unknowns() const { return cyclic_ ? n_ : n_ - 1; }
  double step() const { return h_; }
  double duration() const { return h_ * n_; }

  /// Full node list y_0..y_N from the free unknowns.
  std::vector<Vec2> expand(const Eigen::VectorXd& z) const;
  Eigen::VectorXd compress(const std::vector<Vec2>& nodes) const;

  double action(const Eigen::VectorXd& z) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& z) const;
  /// Gradient and sparse Hessian in one pass.
  void derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& g, Eigen::SparseMatrix<double>& H) const;
  Eigen::MatrixXd dense_hessian(const Eigen::VectorXd& z) const;

  /// max_i |dS/dy_i| / h, the residual of the discrete Euler-Lagrange equations
  double stationarity_residual(const Eigen::VectorXd& z) const;

 private:
  PathProblem(const TonelliLagrangian& L) : L_(&L) {}

  const TonelliLagrangian* L_;
  bool cyclic_ = true;
  int n_ = 0;
  double h_ = 0.0;
  Vec2 shift_ = Vec2::Zero();
  Vec2 a_ = Vec2::Zero();
  Vec2 b_ = Vec2::Zero();
  Vec2 omega_ = Vec2::Zero();
  double k_ = 0.0;
};

struct NewtonOptions {
  double grad_tol = 1e-8;
  int max_iter = 200;
};

struct NewtonResult {
  Eigen::VectorXd z;
  double action = 0.0;
  double initial_action = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt damped Newton with Armijo backtracking. Every
/// accepted step decreases the action.
NewtonResult minimize_path(const PathProblem& problem, Eigen::VectorXd z0, const NewtonOptions& opt = {});

}  // namespace amlab
