#include "amlab/fourier.hpp"

#include <algorithm>
#include <cstdlib>

namespace amlab {

FourierSeries::FourierSeries(std::vector<FourierTerm> terms, double scale)
    : terms_(std::move(terms)), scale_(scale) {
  if (!std::isfinite(scale_)) throw Error(ErrorKind::InvalidInput, "non-finite series scale");
  for (const auto& t : terms_)
    if (!std::isfinite(t.a) || !std::isfinite(t.b))
      throw Error(ErrorKind::InvalidInput, "non-finite Fourier coefficient");
}

bool FourierSeries::is_constant() const {
  return std::all_of(terms_.begin(), terms_.end(), [&](const FourierTerm& t) {
    return (t.m == 0 && t.n == 0) || (scale_ * t.a == 0.0 && scale_ * t.b == 0.0);
  });
}

int FourierSeries::max_harmonic() const {
  int h = 0;
  for (const auto& t : terms_) h = std::max({h, std::abs(t.m), std::abs(t.n)});
  return h;
}

double FourierSeries::value(const Vec2& x) const {
  double f, g1, g2;
  value_grad(x(0), x(1), f, g1, g2);
  return f;
}

FourierSeries::Jet FourierSeries::jet(const Vec2& x) const {
  constexpr double tau = 2.0 * std::numbers::pi;
  Jet out;
  for (const auto& t : terms_) {
    const double a = scale_ * t.a;
    const double b = scale_ * t.b;
    if (t.m == 0 && t.n == 0) {
      out.f += a;
      continue;
    }
    const Vec2 k(tau * t.m, tau * t.n);
    const double phase = k.dot(x);
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double f = a * c + b * s;
    out.f += f;
    out.grad += (b * c - a * s) * k;
    out.hess -= f * (k * k.transpose());
  }
  return out;
}

}  // namespace amlab
