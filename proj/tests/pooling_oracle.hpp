#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "calorie/pooling.hpp"

namespace testing {

/// Loop-only temporal pyramid: floor-split segments, then max, sum and
/// |direct-summation DCT-II| per feature.
inline std::vector<double> brute_pool(const Eigen::MatrixXd& frames, const calorie::pooling::PoolingConfig& cfg) {
  const std::size_t T = static_cast<std::size_t>(frames.rows());
  const std::size_t N = static_cast<std::size_t>(frames.cols());
  std::vector<double> out;
  for (int level = 0; level < cfg.levels; ++level) {
    const std::size_t parts = std::size_t{1} << level;
    for (std::size_t k = 1; k <= parts; ++k) {
      const std::size_t lo = (k - 1) * T / parts, hi = k * T / parts;  // [lo, hi)
      if (cfg.use_max)
        for (std::size_t n = 0; n < N; ++n) {
          double m = frames(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(n));
          for (std::size_t t = lo; t < hi; ++t) m = std::max(m, frames(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n)));
          out.push_back(m);
        }
      if (cfg.use_sum)
        for (std::size_t n = 0; n < N; ++n) {
          double s = 0.0;
          for (std::size_t t = lo; t < hi; ++t) s += frames(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
          out.push_back(s);
        }
      if (cfg.use_dct)
        for (std::size_t n = 0; n < N; ++n) {
          const double L = static_cast<double>(hi - lo);
          for (int j = 0; j < cfg.dct_coefficients; ++j) {
            if (static_cast<double>(j) >= L) {
              out.push_back(0.0);
              continue;
            }
            double d = 0.0;
            for (std::size_t t = lo; t < hi; ++t)
              d += frames(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n)) *
                   std::cos(std::numbers::pi * j * (2.0 * static_cast<double>(t - lo) + 1.0) / (2.0 * L));
            out.push_back(std::abs(d * std::sqrt((j == 0 ? 1.0 : 2.0) / L)));
          }
        }
    }
  }
  return out;
}

}  // namespace testing
