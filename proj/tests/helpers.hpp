#pragma once

#include <optional>
#include <random>

#include "riesz/errors.hpp"
#include "riesz/linalg.hpp"

namespace test_util {

template <class F>
std::optional<riesz::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const riesz::LabError& e) {
    return e.code();
  }
  return std::nullopt;
}

inline riesz::Matrix random_matrix(int n, std::uint64_t seed, bool complex_entries = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  riesz::Matrix m(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) m(i, j) = {normal(rng), complex_entries ? normal(rng) : 0.0};
  }
  return m;
}

inline riesz::RealVector random_weights(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  riesz::RealVector w(n);
  for (int i = 0; i < n; ++i) w(i) = u(rng);
  return w;
}

}  // namespace test_util
