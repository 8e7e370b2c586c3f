#include <cmath>
#include <numbers>

#include "calorie/features.hpp"

namespace calorie::features {

void HogConfig::validate(int side) const {
  require(cell >= 1 && bins >= 2 && block >= 1 && block_stride >= 1, "hog: invalid configuration");
  require(side % cell == 0, "hog: patch side must be divisible by the cell size");
  require(block <= side / cell, "hog: block larger than the cell grid");
}

std::size_t HogConfig::length(int side) const {
  validate(side);
  const int cells = side / cell;
  const int blocks = (cells - block) / block_stride + 1;
  return static_cast<std::size_t>(blocks * blocks * block * block * bins);
}

std::vector<double> depth_hog(const ScalarGrid& patch, const HogConfig& cfg) {
  require(patch.rows() == patch.cols(), "hog: patch must be square");
  const int side = static_cast<int>(patch.rows());
  cfg.validate(side);
  const int cells = side / cfg.cell;
  const double bin_width = std::numbers::pi / cfg.bins;

  std::vector<double> cell_hist(static_cast<std::size_t>(cells * cells * cfg.bins), 0.0);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const double gx = patch.clamped(r, c + 1) - patch.clamped(r, c - 1);
      const double gy = patch.clamped(r + 1, c) - patch.clamped(r - 1, c);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += std::numbers::pi;
      if (theta >= std::numbers::pi) theta -= std::numbers::pi;
      // Linear vote between the two nearest bin centres, wrapping at pi.
      const double pos = theta / bin_width - 0.5;
      const double lower = std::floor(pos);
      const double frac = pos - lower;
      const int b0 = (static_cast<int>(lower) + cfg.bins) % cfg.bins;
      const int b1 = (b0 + 1) % cfg.bins;
      const int cell = (r / cfg.cell) * cells + (c / cfg.cell);
      double* h = &cell_hist[static_cast<std::size_t>(cell * cfg.bins)];
      h[b0] += mag * (1.0 - frac);
      h[b1] += mag * frac;
    }

  const int blocks = (cells - cfg.block) / cfg.block_stride + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(blocks * blocks * cfg.block * cfg.block * cfg.bins));
  std::vector<double> block(static_cast<std::size_t>(cfg.block * cfg.block * cfg.bins));
  for (int by = 0; by < blocks; ++by)
    for (int bx = 0; bx < blocks; ++bx) {
      std::size_t n = 0;
      double norm2 = 0.0;
      for (int cy = 0; cy < cfg.block; ++cy)
        for (int cx = 0; cx < cfg.block; ++cx) {
          const int cell = (by * cfg.block_stride + cy) * cells + (bx * cfg.block_stride + cx);
          for (int b = 0; b < cfg.bins; ++b) {
            const double value = cell_hist[static_cast<std::size_t>(cell * cfg.bins + b)];
            block[n++] = value;
            norm2 += value * value;
          }
        }
      const double denom = std::sqrt(norm2 + cfg.epsilon * cfg.epsilon);
      for (double value : block) out.push_back(value / denom);
    }
  return out;
}

}  // namespace calorie::features
