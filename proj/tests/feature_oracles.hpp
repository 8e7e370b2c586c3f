#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "calorie/features.hpp"

namespace testing {

/// Per-pixel reference: explicit edge search for the orientation bin.
inline std::vector<double> naive_flow_hist(const calorie::ScalarGrid& u, const calorie::ScalarGrid& v, const calorie::features::SpatialPyramidConfig& cfg) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> out;
  for (const int g : cfg.levels)
    for (int gy = 0; gy < g; ++gy)
      for (int gx = 0; gx < g; ++gx) {
        std::vector<double> h(static_cast<std::size_t>(cfg.bins), 0.0);
        for (std::size_t r = 0; r < u.rows(); ++r) {
          if (static_cast<int>(r * g / u.rows()) != gy) continue;
          for (std::size_t c = 0; c < u.cols(); ++c) {
            if (static_cast<int>(c * g / u.cols()) != gx) continue;
            const double m = std::sqrt(u(r, c) * u(r, c) + v(r, c) * v(r, c));
            if (m < cfg.min_magnitude || m == 0.0) continue;
            const double a = std::fmod(std::atan2(v(r, c), u(r, c)) + two_pi, two_pi);
            int bin = cfg.bins - 1;
            for (int b = 0; b < cfg.bins; ++b)
              if (a < two_pi * (b + 1) / cfg.bins) {
                bin = b;
                break;
              }
            h[static_cast<std::size_t>(bin)] += m;
          }
        }
        double n2 = cfg.epsilon * cfg.epsilon;
        for (double x : h) n2 += x * x;
        for (double x : h) out.push_back(x / std::sqrt(n2));
      }
  return out;
}

/// Per-pixel reference HOG with votes split between the two nearest bin centres.
inline std::vector<double> naive_hog(const calorie::ScalarGrid& p, const calorie::features::HogConfig& cfg) {
  const int n = static_cast<int>(p.rows());
  const int cells = n / cfg.cell;
  const double width = std::numbers::pi / cfg.bins;
  std::vector<std::vector<double>> hist(static_cast<std::size_t>(cells * cells), std::vector<double>(cfg.bins, 0.0));
  const auto at = [&](int r, int c) {
    r = std::clamp(r, 0, n - 1);
    c = std::clamp(c, 0, n - 1);
    return p(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      const double gx = at(r, c + 1) - at(r, c - 1), gy = at(r + 1, c) - at(r - 1, c);
      const double m = std::sqrt(gx * gx + gy * gy);
      if (m == 0.0) continue;
      const double a = std::fmod(std::atan2(gy, gx) + 2.0 * std::numbers::pi, std::numbers::pi);
      auto& h = hist[static_cast<std::size_t>((r / cfg.cell) * cells + c / cfg.cell)];
      for (int b = 0; b < cfg.bins; ++b) {
        const double centre = (b + 0.5) * width;
        double d = std::abs(a - centre);
        d = std::min(d, std::numbers::pi - d);
        if (d < width) h[static_cast<std::size_t>(b)] += m * (1.0 - d / width);
      }
    }
  std::vector<double> out;
  const int blocks = (cells - cfg.block) / cfg.block_stride + 1;
  for (int by = 0; by < blocks; ++by)
    for (int bx = 0; bx < blocks; ++bx) {
      std::vector<double> v;
      for (int cy = 0; cy < cfg.block; ++cy)
        for (int cx = 0; cx < cfg.block; ++cx)
          for (double x : hist[static_cast<std::size_t>((by * cfg.block_stride + cy) * cells + bx * cfg.block_stride + cx)])
            v.push_back(x);
      double n2 = cfg.epsilon * cfg.epsilon;
      for (double x : v) n2 += x * x;
      for (double x : v) out.push_back(x / std::sqrt(n2));
    }
  return out;
}

}  // namespace testing
