// Shared helpers for the test suite.

#pragma once

#include <array>
#include <cmath>
#include <random>

#include "ricciflow/geometry.hpp"

namespace test_support {

inline double rel_diff(double x, double y) {
  return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::abs(want);
}

// Random state on the canonical slice A B C = 4, coefficients within
// [e^-2, e^2] for the two free ones.
struct RandomStates {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> logu{-2.0, 2.0};

  explicit RandomStates(unsigned seed = 7u) : rng(seed) {}

  ricciflow::MetricState next() {
    const double a = std::exp(logu(rng));
    const double b = std::exp(logu(rng));
    return ricciflow::MetricState{0.0, a, b, 4.0 / (a * b)};
  }
};

} // namespace test_support
