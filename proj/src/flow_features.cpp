#include <cmath>
#include <numbers>

#include "calorie/features.hpp"

namespace calorie::features {

void SpatialPyramidConfig::validate() const {
  require(bins >= 2, "spatial pyramid: need at least two orientation bins");
  require(!levels.empty(), "spatial pyramid: no levels");
  for (int g : levels) require(g >= 1, "spatial pyramid: grid size must be >= 1");
  require(min_magnitude >= 0.0, "spatial pyramid: negative magnitude threshold");
}

std::size_t SpatialPyramidConfig::length() const {
  std::size_t cells = 0;
  for (int g : levels) cells += static_cast<std::size_t>(g) * static_cast<std::size_t>(g);
  return cells * static_cast<std::size_t>(bins);
}

std::vector<double> flow_pyramid_histogram(const ScalarGrid& u, const ScalarGrid& v,
                                           const SpatialPyramidConfig& cfg) {
  cfg.validate();
  require(u.same_shape(v), "flow_pyramid_histogram: u/v shape mismatch");
  const std::size_t rows = u.rows();
  const std::size_t cols = u.cols();
  const double bin_width = 2.0 * std::numbers::pi / cfg.bins;

  // Orientation bin and weight per pixel, shared by every level.
  std::vector<int> bin_of(rows * cols, -1);
  std::vector<double> weight(rows * cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double du = u(r, c);
      const double dv = v(r, c);
      const double mag = std::hypot(du, dv);
      if (mag < cfg.min_magnitude || mag == 0.0) continue;
      double theta = std::atan2(dv, du);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      int b = static_cast<int>(theta / bin_width);
      if (b >= cfg.bins) b = cfg.bins - 1;
      bin_of[r * cols + c] = b;
      weight[r * cols + c] = mag;
    }

  std::vector<double> out;
  out.reserve(cfg.length());
  for (int g : cfg.levels) {
    for (int gy = 0; gy < g; ++gy) {
      const std::size_t r0 = rows * static_cast<std::size_t>(gy) / static_cast<std::size_t>(g);
      const std::size_t r1 = rows * static_cast<std::size_t>(gy + 1) / static_cast<std::size_t>(g);
      for (int gx = 0; gx < g; ++gx) {
        const std::size_t c0 = cols * static_cast<std::size_t>(gx) / static_cast<std::size_t>(g);
        const std::size_t c1 = cols * static_cast<std::size_t>(gx + 1) / static_cast<std::size_t>(g);
        std::vector<double> hist(static_cast<std::size_t>(cfg.bins), 0.0);
        for (std::size_t r = r0; r < r1; ++r)
          for (std::size_t c = c0; c < c1; ++c) {
            const int b = bin_of[r * cols + c];
            if (b >= 0) hist[static_cast<std::size_t>(b)] += weight[r * cols + c];
          }
        double norm2 = 0.0;
        for (double h : hist) norm2 += h * h;
        const double denom = std::sqrt(norm2 + cfg.epsilon * cfg.epsilon);
        for (double h : hist) out.push_back(h / denom);
      }
    }
  }
  return out;
}

FrameDescriptor build_frame_descriptor(std::vector<double> flow_hist, std::vector<double> depth_proj,
                                       std::size_t frame_index) {
  FrameDescriptor d;
  d.frame_index = frame_index;
  d.flow_part = std::move(flow_hist);
  d.depth_part = std::move(depth_proj);
  d.combined.reserve(d.flow_part.size() + d.depth_part.size());
  d.combined.insert(d.combined.end(), d.flow_part.begin(), d.flow_part.end());
  d.combined.insert(d.combined.end(), d.depth_part.begin(), d.depth_part.end());
  return d;
}

}  // namespace calorie::features
