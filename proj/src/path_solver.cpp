#include "amlab/path_solver.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

namespace amlab {

PathProblem PathProblem::loop(const TonelliLagrangian& L, int n, double period, IntClass homology, Vec2 omega,
                              double k_offset) {
  if (n < DiscreteLoop::kMinNodes) throw Error(ErrorKind::Resolution, "a discrete loop needs at least 8 nodes");
  if (!(period > 0.0) || !std::isfinite(period))
    throw Error(ErrorKind::DegenerateLoop, "loop period must be positive and finite");
  PathProblem p(L);
  p.cyclic_ = true;
  p.n_ = n;
  p.h_ = period / n;
  p.shift_ = homology.as_vec();
  p.omega_ = omega;
  p.k_ = k_offset;
  return p;
}

PathProblem PathProblem::fixed(const TonelliLagrangian& L, int n, double duration, Vec2 a, Vec2 b, Vec2 omega,
                               double k_offset) {
  if (n < 2) throw Error(ErrorKind::Resolution, "a path needs at least two segments");
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw Error(ErrorKind::InvalidInput, "path duration must be positive");
  PathProblem p(L);
  p.cyclic_ = false;
  p.n_ = n;
  p.h_ = duration / n;
  p.a_ = a;
  p.b_ = b;
  p.shift_ = b - a;
  p.omega_ = omega;
  p.k_ = k_offset;
  return p;
}

std::vector<Vec2> PathProblem::expand(const Eigen::VectorXd& z) const {
  std::vector<Vec2> y(static_cast<std::size_t>(n_ + 1));
  if (cyclic_) {
    for (int i = 0; i < n_; ++i) y[i] = z.segment<2>(2 * i);
    y[n_] = y[0] + shift_;
  } else {
    y[0] = a_;
    for (int i = 1; i < n_; ++i) y[i] = z.segment<2>(2 * (i - 1));
    y[n_] = b_;
  }
  return y;
}

Eigen::VectorXd PathProblem::compress(const std::vector<Vec2>& nodes) const {
  Eigen::VectorXd z(2 * unknowns());
  const int first = cyclic_ ? 0 : 1;
  for (int i = 0; i < unknowns(); ++i) z.segment<2>(2 * i) = nodes[std::size_t(i + first)];
  return z;
}

double PathProblem::action(const Eigen::VectorXd& z) const {
  const auto y = expand(z);
  double s = 0.0;
  for (int i = 0; i < n_; ++i) s += L_->value(0.5 * (y[i] + y[i + 1]), (y[i + 1] - y[i]) / h_);
  return h_ * s + k_ * duration() - omega_.dot(shift_);
}

namespace {

// unknown index of node j, or -1 for a fixed endpoint
inline int slot(bool cyclic, int n, int j) {
  if (cyclic) return j % n;
  return (j == 0 || j == n) ? -1 : j - 1;
}

}  // namespace

Eigen::VectorXd PathProblem::gradient(const Eigen::VectorXd& z) const {
  const auto y = expand(z);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(z.size());
  for (int i = 0; i < n_; ++i) {
    const Jet j = L_->jet(0.5 * (y[i] + y[i + 1]), (y[i + 1] - y[i]) / h_);
    const int a = slot(cyclic_, n_, i), b = slot(cyclic_, n_, i + 1);
    if (a >= 0) g.segment<2>(2 * a) += 0.5 * h_ * j.Lx - j.Lv;
    if (b >= 0) g.segment<2>(2 * b) += 0.5 * h_ * j.Lx + j.Lv;
  }
  return g;
}

void PathProblem::derivatives(const Eigen::VectorXd& z, Eigen::VectorXd& g, Eigen::SparseMatrix<double>& H) const {
  const auto y = expand(z);
  const int m = 2 * unknowns();
  g = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(std::size_t(16 * n_));
  const double alpha = 0.5;
  for (int i = 0; i < n_; ++i) {
    const Jet j = L_->jet(0.5 * (y[i] + y[i + 1]), (y[i + 1] - y[i]) / h_);
    const int idx[2] = {slot(cyclic_, n_, i), slot(cyclic_, n_, i + 1)};
    const double beta[2] = {-1.0 / h_, 1.0 / h_};
    if (idx[0] >= 0) g.segment<2>(2 * idx[0]) += 0.5 * h_ * j.Lx - j.Lv;
    if (idx[1] >= 0) g.segment<2>(2 * idx[1]) += 0.5 * h_ * j.Lx + j.Lv;
    const Mat2 lxv = j.Lvx.transpose();
    for (int p = 0; p < 2; ++p) {
      if (idx[p] < 0) continue;
      for (int q = 0; q < 2; ++q) {
        if (idx[q] < 0) continue;
        const Mat2 blk = h_ * (alpha * alpha * j.Lxx + alpha * beta[q] * lxv + beta[p] * alpha * j.Lvx +
                               beta[p] * beta[q] * j.Lvv);
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) trip.emplace_back(2 * idx[p] + r, 2 * idx[q] + c, blk(r, c));
      }
    }
  }
  H.resize(m, m);
  H.setFromTriplets(trip.begin(), trip.end());
}

Eigen::MatrixXd PathProblem::dense_hessian(const Eigen::VectorXd& z) const {
  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> H;
  derivatives(z, g, H);
  return Eigen::MatrixXd(H);
}

double PathProblem::stationarity_residual(const Eigen::VectorXd& z) const {
  return gradient(z).lpNorm<Eigen::Infinity>() / h_;
}

NewtonResult minimize_path(const PathProblem& problem, Eigen::VectorXd z0, const NewtonOptions& opt) {
  NewtonResult res;
  res.z = std::move(z0);
  res.action = problem.action(res.z);
  res.initial_action = res.action;
  if (!std::isfinite(res.action)) throw Error(ErrorKind::InvalidInput, "initial path has non-finite action");

  Eigen::VectorXd g;
  Eigen::SparseMatrix<double> H;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  double mu = 0.0;

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    problem.derivatives(res.z, g, H);
    res.grad_norm = g.lpNorm<Eigen::Infinity>();
    if (res.grad_norm <= opt.grad_tol) {
      res.converged = true;
      return res;
    }
    if (!analyzed) {
      ldlt.analyzePattern(H);
      analyzed = true;
    }
    const double diag_scale = std::max(1e-12, H.diagonal().cwiseAbs().maxCoeff());

    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> A = H;
      if (mu > 0.0)
        for (int k = 0; k < A.rows(); ++k) A.coeffRef(k, k) += mu * diag_scale;
      ldlt.factorize(A);
      if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0) {
        mu = mu == 0.0 ? 1e-10 : mu * 10.0;
        continue;
      }
      const Eigen::VectorXd d = -ldlt.solve(g);
      const double slope = g.dot(d);
      double t = 1.0;
      for (int bt = 0; bt < 40; ++bt, t *= 0.5) {
        const Eigen::VectorXd trial = res.z + t * d;
        const double s = problem.action(trial);
        if (std::isfinite(s) && s <= res.action + 1e-4 * t * slope) {
          res.z = trial;
          res.action = s;
          accepted = true;
          break;
        }
      }
      if (accepted) {
        if (t == 1.0) mu = mu <= 1e-10 ? 0.0 : mu * 0.1;
      } else {
        // near the minimum the action change drowns in rounding; accept a
        // Newton step that does not raise the action beyond that level and
        // shrinks the gradient
        const Eigen::VectorXd trial = res.z + d;
        const double s = problem.action(trial);
        const double noise = 1e-13 * std::max(1.0, std::abs(res.action));
        if (std::isfinite(s) && s <= res.action + noise &&
            problem.gradient(trial).lpNorm<Eigen::Infinity>() < res.grad_norm) {
          res.z = trial;
          res.action = s;
          accepted = true;
        } else {
          mu = mu == 0.0 ? 1e-8 : mu * 10.0;
        }
      }
    }
    if (!accepted) break;
  }
  res.grad_norm = problem.gradient(res.z).lpNorm<Eigen::Infinity>();
  res.converged = res.grad_norm <= opt.grad_tol;
  return res;
}

}  // namespace amlab
