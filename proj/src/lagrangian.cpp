#include "amlab/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <unsupported/Eigen/AutoDiff>

namespace amlab {

const char* to_string(Family f) {
  switch (f) {
    case Family::FlatKinetic: return "flat-kinetic";
    case Family::Mechanical: return "mechanical";
    case Family::Magnetic: return "magnetic";
    case Family::CustomFourier: return "custom-fourier";
  }
  return "unknown";
}

Family family_from_string(const std::string& s) {
  if (s == "flat-kinetic") return Family::FlatKinetic;
  if (s == "mechanical") return Family::Mechanical;
  if (s == "magnetic") return Family::Magnetic;
  if (s == "custom-fourier") return Family::CustomFourier;
  throw Error(ErrorKind::InvalidInput, "unknown Lagrangian family '" + s + "'");
}

namespace {

bool identity_or_empty(const FourierSeries& s, double diag) {
  if (s.empty()) return true;
  return s.is_constant() && s.value(Vec2::Zero()) == diag;
}

}  // namespace

TonelliLagrangian::TonelliLagrangian(LagrangianData data) : data_(std::move(data)) {
  if (data_.max_harmonic < 0) throw Error(ErrorKind::InvalidInput, "negative max harmonic");
  if (data_.g11.empty()) data_.g11 = FourierSeries::constant(1.0);
  if (data_.g22.empty()) data_.g22 = FourierSeries::constant(1.0);
  const auto check = [&](const FourierSeries& s, const char* name) {
    if (s.max_harmonic() > data_.max_harmonic)
      throw Error(ErrorKind::InvalidInput,
                  std::string("series '") + name + "' exceeds the configured max harmonic");
  };
  check(data_.g11, "g11");
  check(data_.g12, "g12");
  check(data_.g22, "g22");
  check(data_.potential, "potential");
  check(data_.a1, "a1");
  check(data_.a2, "a2");
  check(data_.quartic, "quartic");

  const bool metric_id = identity_or_empty(data_.g11, 1.0) && identity_or_empty(data_.g12, 0.0) &&
                         identity_or_empty(data_.g22, 1.0);
  const bool no_a = data_.a1.empty() && data_.a2.empty();
  switch (data_.family) {
    case Family::FlatKinetic:
      if (!metric_id || !no_a || !data_.potential.empty() || !data_.quartic.empty())
        throw Error(ErrorKind::InvalidInput, "flat-kinetic takes no coefficient tables");
      break;
    case Family::Mechanical:
      if (!metric_id || !no_a || !data_.quartic.empty())
        throw Error(ErrorKind::InvalidInput, "mechanical family takes only a potential");
      break;
    case Family::Magnetic:
      if (!data_.quartic.empty())
        throw Error(ErrorKind::InvalidInput, "quartic term is only available for custom-fourier");
      break;
    case Family::CustomFourier: break;
  }
  flat_metric_ = metric_id;
  has_magnetic_ = !no_a;
  has_quartic_ = !data_.quartic.empty();
}

TonelliLagrangian TonelliLagrangian::flat() { return TonelliLagrangian(LagrangianData{}); }

TonelliLagrangian TonelliLagrangian::mechanical(FourierSeries potential) {
  LagrangianData d;
  d.family = Family::Mechanical;
  d.potential = std::move(potential);
  return TonelliLagrangian(std::move(d));
}

TonelliLagrangian TonelliLagrangian::standard_mechanical(double eps) {
  return mechanical(FourierSeries({{1, 0, 1.0, 0.0}, {0, 1, 1.0, 0.0}}, eps));
}

TonelliLagrangian TonelliLagrangian::magnetic(FourierSeries a1, FourierSeries a2,
                                              FourierSeries potential) {
  LagrangianData d;
  d.family = Family::Magnetic;
  d.a1 = std::move(a1);
  d.a2 = std::move(a2);
  d.potential = std::move(potential);
  return TonelliLagrangian(std::move(d));
}

TonelliLagrangian TonelliLagrangian::shifted(double k) const {
  LagrangianData d = data_;
  std::vector<FourierTerm> terms;
  for (const auto& t : d.potential.terms())
    terms.push_back({t.m, t.n, t.a * d.potential.scale(), t.b * d.potential.scale()});
  terms.push_back({0, 0, k, 0.0});
  d.potential = FourierSeries(std::move(terms));
  if (d.family == Family::FlatKinetic) d.family = Family::Mechanical;
  return TonelliLagrangian(std::move(d));
}

double TonelliLagrangian::potential(const Vec2& x) const { return data_.potential.value(x); }

Mat2 TonelliLagrangian::metric(const Vec2& x) const {
  if (flat_metric_) return Mat2::Identity();
  const double g12 = data_.g12.value(x);
  Mat2 g;
  g << data_.g11.value(x), g12, g12, data_.g22.value(x);
  return g;
}

double TonelliLagrangian::value(const Vec2& x, const Vec2& v) const {
  const double s = v.squaredNorm();
  double out = 0.5 * v.dot(metric(x) * v) - data_.potential.value(x);
  if (has_magnetic_) out += data_.a1.value(x) * v(0) + data_.a2.value(x) * v(1);
  if (has_quartic_) out += 0.25 * data_.quartic.value(x) * s * s;
  return out;
}

Jet TonelliLagrangian::jet(const Vec2& x, const Vec2& v) const {
  Jet j;
  const double s = v.squaredNorm();
  const auto u = data_.potential.jet(x);
  j.L = -u.f;
  j.Lx = -u.grad;
  j.Lxx = -u.hess;

  if (flat_metric_) {
    j.L += 0.5 * s;
    j.Lv = v;
    j.Lvv = Mat2::Identity();
  } else {
    const auto g11 = data_.g11.jet(x);
    const auto g12 = data_.g12.jet(x);
    const auto g22 = data_.g22.jet(x);
    Mat2 g;
    g << g11.f, g12.f, g12.f, g22.f;
    j.L += 0.5 * v.dot(g * v);
    j.Lv = g * v;
    j.Lvv = g;
    for (int a = 0; a < 2; ++a) {
      Mat2 dg;
      dg << g11.grad(a), g12.grad(a), g12.grad(a), g22.grad(a);
      j.Lx(a) += 0.5 * v.dot(dg * v);
      j.Lvx.col(a) += dg * v;
      for (int b = 0; b < 2; ++b) {
        Mat2 ddg;
        ddg << g11.hess(a, b), g12.hess(a, b), g12.hess(a, b), g22.hess(a, b);
        j.Lxx(a, b) += 0.5 * v.dot(ddg * v);
      }
    }
  }

  if (has_magnetic_) {
    const auto a1 = data_.a1.jet(x);
    const auto a2 = data_.a2.jet(x);
    j.L += a1.f * v(0) + a2.f * v(1);
    j.Lv += Vec2(a1.f, a2.f);
    j.Lx += a1.grad * v(0) + a2.grad * v(1);
    j.Lvx.row(0) += a1.grad.transpose();
    j.Lvx.row(1) += a2.grad.transpose();
    j.Lxx += a1.hess * v(0) + a2.hess * v(1);
  }

  if (has_quartic_) {
    const auto q = data_.quartic.jet(x);
    j.L += 0.25 * q.f * s * s;
    j.Lv += q.f * s * v;
    j.Lvv += q.f * (s * Mat2::Identity() + 2.0 * v * v.transpose());
    j.Lx += 0.25 * s * s * q.grad;
    j.Lvx += s * v * q.grad.transpose();
    j.Lxx += 0.25 * s * s * q.hess;
  }
  return j;
}

Vec2 TonelliLagrangian::acceleration(const Vec2& x, const Vec2& v) const {
  if (!flat_metric_ || has_quartic_) {
    const Mat2 h = jet(x, v).Lvv;
    Eigen::SelfAdjointEigenSolver<Mat2> es;
    es.computeDirect(h, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(1);
    if (!(lo > 0.0) || hi / lo > 1e8)
      throw Error(ErrorKind::IllConditioned, "fiber Hessian condition number exceeds 1e8");
  }
  return acceleration_t<double>(x, v);
}

Mat4 TonelliLagrangian::flow_jacobian(const Vec2& x, const Vec2& v) const {
  using AD = Eigen::AutoDiffScalar<Vec4>;
  Eigen::Matrix<AD, 2, 1> xa, va;
  for (int i = 0; i < 2; ++i) {
    xa(i) = AD(x(i), 4, i);
    va(i) = AD(v(i), 4, 2 + i);
  }
  const auto a = acceleration_t<AD>(xa, va);
  Mat4 jac = Mat4::Zero();
  jac(0, 2) = 1.0;
  jac(1, 3) = 1.0;
  jac.row(2) = a(0).derivatives().transpose();
  jac.row(3) = a(1).derivatives().transpose();
  return jac;
}

namespace {

void check_finite(const TangentState& s) {
  if (!all_finite(s.point.x) || !all_finite(s.v))
    throw Error(ErrorKind::InvalidInput, "non-finite tangent state");
}

void check_finite(const CotangentState& c) {
  if (!all_finite(c.point.x) || !all_finite(c.p))
    throw Error(ErrorKind::InvalidInput, "non-finite cotangent state");
}

}  // namespace

double eval_L(const TonelliLagrangian& L, const TangentState& s) {
  check_finite(s);
  return L.value(s.point.x, s.v);
}

double energy(const TonelliLagrangian& L, const Vec2& x, const Vec2& v) {
  const Jet j = L.jet(x, v);
  return j.Lv.dot(v) - j.L;
}

double energy(const TonelliLagrangian& L, const TangentState& s) {
  check_finite(s);
  return energy(L, s.point.x, s.v);
}

CotangentState legendre(const TonelliLagrangian& L, const TangentState& s) {
  check_finite(s);
  return {s.point, L.jet(s.point.x, s.v).Lv};
}

Vec2 inverse_legendre_v(const TonelliLagrangian& L, const Vec2& x, const Vec2& p) {
  constexpr int max_iter = 50;
  const double tol = 1e-12 * std::max(1.0, p.norm());
  Vec2 v = p;
  Jet j = L.jet(x, v);
  Vec2 r = j.Lv - p;
  double rn = r.norm();
  for (int it = 0; it < max_iter && rn > tol; ++it) {
    const Vec2 step = j.Lvv.ldlt().solve(r);
    double t = 1.0;
    bool improved = false;
    for (int halve = 0; halve < 40; ++halve, t *= 0.5) {
      const Vec2 trial = v - t * step;
      const Jet jt = L.jet(x, trial);
      const Vec2 rt = jt.Lv - p;
      if (rt.norm() < rn) {
        v = trial;
        j = jt;
        r = rt;
        rn = rt.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (!(rn <= tol))
    throw Error(ErrorKind::Convergence, "fiber Newton did not reach the residual tolerance");
  return v;
}

TangentState inverse_legendre(const TonelliLagrangian& L, const CotangentState& c) {
  check_finite(c);
  return {c.point, inverse_legendre_v(L, c.point.x, c.p)};
}

double hamiltonian(const TonelliLagrangian& L, const CotangentState& c) {
  const TangentState s = inverse_legendre(L, c);
  return c.p.dot(s.v) - L.value(s.point.x, s.v);
}

namespace {

double rel_err(double analytic, double fd) {
  return std::abs(analytic - fd) / std::max(1.0, std::abs(analytic));
}

// Largest relative mismatch between analytic derivatives and central
// differences at one state.
double derivative_mismatch(const TonelliLagrangian& L, const Vec2& x, const Vec2& v, double h) {
  const Jet j = L.jet(x, v);
  double worst = 0.0;
  for (int a = 0; a < 2; ++a) {
    Vec2 e = Vec2::Zero();
    e(a) = h;
    const Jet xp = L.jet(x + e, v), xm = L.jet(x - e, v);
    const Jet vp = L.jet(x, v + e), vm = L.jet(x, v - e);
    worst = std::max(worst, rel_err(j.Lx(a), (xp.L - xm.L) / (2 * h)));
    worst = std::max(worst, rel_err(j.Lv(a), (vp.L - vm.L) / (2 * h)));
    for (int b = 0; b < 2; ++b) {
      worst = std::max(worst, rel_err(j.Lvv(b, a), (vp.Lv(b) - vm.Lv(b)) / (2 * h)));
      worst = std::max(worst, rel_err(j.Lvx(b, a), (xp.Lv(b) - xm.Lv(b)) / (2 * h)));
      worst = std::max(worst, rel_err(j.Lxx(b, a), (xp.Lx(b) - xm.Lx(b)) / (2 * h)));
    }
  }
  return worst;
}

}  // namespace

ValidationReport validate_tonelli(const TonelliLagrangian& L, const ValidationGrid& grid) {
  if (grid.base_points < 32 || grid.speeds < 8 || grid.directions < 1 || !(grid.speed_cap > 0.0))
    throw Error(ErrorKind::InvalidInput, "validation grid needs >= 32^2 points and >= 8 speeds");
  ValidationReport rep;
  rep.min_hessian_eigenvalue = std::numeric_limits<double>::infinity();
  rep.superlinearity.assign(std::size_t(grid.speeds), std::numeric_limits<double>::infinity());
  const int n = grid.base_points;
  int counter = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      const Vec2 x(double(i) / n, double(k) / n);
      for (int d = 0; d < grid.directions; ++d) {
        const double th = 2.0 * std::numbers::pi * (d + 0.5) / grid.directions;
        const Vec2 u(std::cos(th), std::sin(th));
        for (int r = 0; r < grid.speeds; ++r) {
          const double speed = grid.speed_cap * double(r + 1) / grid.speeds;
          const Vec2 v = speed * u;
          const Jet j = L.jet(x, v);
          Eigen::SelfAdjointEigenSolver<Mat2> es;
          es.computeDirect(j.Lvv, Eigen::EigenvaluesOnly);
          rep.min_hessian_eigenvalue = std::min(rep.min_hessian_eigenvalue, es.eigenvalues()(0));
          rep.superlinearity[r] = std::min(rep.superlinearity[r], j.L / speed);
          ++rep.states_checked;
          // derivative audit on a rotating subset of the states
          if (counter++ % 16 == 0)
            rep.max_derivative_mismatch =
                std::max(rep.max_derivative_mismatch, derivative_mismatch(L, x, v, grid.fd_step));
        }
        // include small speeds in the convexity check
        const Jet j0 = L.jet(x, 0.05 * u);
        Eigen::SelfAdjointEigenSolver<Mat2> es0;
        es0.computeDirect(j0.Lvv, Eigen::EigenvaluesOnly);
        rep.min_hessian_eigenvalue = std::min(rep.min_hessian_eigenvalue, es0.eigenvalues()(0));
      }
    }
  }
  rep.superlinear = true;
  for (std::size_t r = 1; r < rep.superlinearity.size(); ++r)
    if (!(rep.superlinearity[r] > rep.superlinearity[r - 1])) rep.superlinear = false;
  if (!(rep.min_hessian_eigenvalue > 0.0))
    throw Error(ErrorKind::NotTonelli, "fiber Hessian is not positive definite on the grid");
  if (!rep.superlinear)
    throw Error(ErrorKind::NotTonelli, "L(x,v)/|v| does not grow along the sampled rays");
  if (rep.max_derivative_mismatch > 1e-5)
    throw Error(ErrorKind::InconsistentDerivatives, "analytic and finite-difference derivatives disagree");
  return rep;
}

}  // namespace amlab
