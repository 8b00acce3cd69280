#pragma once

#include <random>

#include "amlab/lagrangian.hpp"

namespace fixtures {

using namespace amlab;

// Non-separable Lagrangian touching every coefficient table.
inline TonelliLagrangian rich_custom() {
  LagrangianData d;
  d.family = Family::CustomFourier;
  d.g11 = FourierSeries({{0, 0, 1.0, 0.0}, {1, 0, 0.2, 0.0}});
  d.g12 = FourierSeries({{0, 1, 0.0, 0.1}});
  d.g22 = FourierSeries({{0, 0, 1.0, 0.0}, {1, 1, 0.1, 0.05}});
  d.a1 = FourierSeries({{0, 1, 0.0, 0.3}});
  d.a2 = FourierSeries({{1, 0, 0.2, 0.0}, {0, 0, 0.1, 0.0}});
  d.potential = FourierSeries({{1, 0, 0.1, 0.0}, {1, -1, 0.05, 0.02}});
  d.quartic = FourierSeries({{0, 0, 0.01, 0.0}, {1, 0, 0.005, 0.0}});
  return TonelliLagrangian(d);
}

inline TonelliLagrangian magnetic_demo() {
  return TonelliLagrangian::magnetic(FourierSeries({{0, 1, 0.0, 0.3}}), FourierSeries({{1, 0, 0.2, 0.0}}),
                                     FourierSeries({{1, 1, 0.05, 0.0}}));
}

inline Vec2 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

}  // namespace fixtures
