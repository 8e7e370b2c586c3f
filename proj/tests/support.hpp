#pragma once

#include <random>

#include "calorie/grid.hpp"

namespace testing {

inline calorie::ScalarGrid random_grid(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                       double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  calorie::ScalarGrid g(rows, cols);
  for (double& v : g.values()) v = dist(rng);
  return g;
}

}  // namespace testing
