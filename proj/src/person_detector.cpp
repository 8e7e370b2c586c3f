#include <algorithm>
#include <queue>

#include "calorie/imaging.hpp"

namespace calorie::imaging {

DepthBackground::DepthBackground(std::size_t rows, std::size_t cols, int bin_mm, int max_mm)
    : rows_(rows), cols_(cols), bin_mm_(bin_mm), bins_(max_mm / bin_mm + 1) {
  require(bin_mm > 0 && max_mm > bin_mm, "invalid depth background binning");
  counts_.assign(rows * cols * static_cast<std::size_t>(bins_), 0);
}

void DepthBackground::add(const DepthImage& depth) {
  require(depth.rows() == rows_ && depth.cols() == cols_, "depth background: frame size mismatch");
  const auto values = depth.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0) continue;
    const int bin = std::min(static_cast<int>(values[i]) / bin_mm_, bins_ - 1);
    ++counts_[i * static_cast<std::size_t>(bins_) + static_cast<std::size_t>(bin)];
  }
}

DepthImage DepthBackground::mode() const {
  DepthImage out(rows_, cols_, 0);
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const auto* h = &counts_[i * static_cast<std::size_t>(bins_)];
    int best = -1;
    std::uint32_t best_count = 0;
    // Ties resolve to the farther bin: background is behind anything that occludes it.
    for (int b = 0; b < bins_; ++b)
      if (h[b] > 0 && h[b] >= best_count) {
        best = b;
        best_count = h[b];
      }
    if (best >= 0) dst[i] = static_cast<std::uint16_t>(best * bin_mm_ + bin_mm_ / 2);
  }
  return out;
}

std::optional<BoundingBox> detect_person(const DepthImage& depth, const DepthImage& background,
                                         const DetectorParams& params) {
  require(depth.same_shape(background), "detect_person: background size mismatch");
  const std::size_t rows = depth.rows();
  const std::size_t cols = depth.cols();
  Grid<std::uint8_t> mask(rows, cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const int d = depth(r, c);
      const int bg = background(r, c);
      const bool in_range = d >= params.near_mm && d <= params.far_mm;
      const bool foreground = bg == 0 || d < bg - params.foreground_margin_mm;
      mask(r, c) = (in_range && foreground) ? 1 : 0;
    }

  Grid<std::uint8_t> seen(rows, cols, 0);
  std::optional<BoundingBox> best;
  int best_area = 0;
  std::queue<std::pair<std::size_t, std::size_t>> frontier;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      if (!mask(r, c) || seen(r, c)) continue;
      int area = 0;
      std::size_t x0 = c, x1 = c, y0 = r, y1 = r;
      seen(r, c) = 1;
      frontier.emplace(r, c);
      while (!frontier.empty()) {
        const auto [y, x] = frontier.front();
        frontier.pop();
        ++area;
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
        const auto visit = [&](std::size_t ny, std::size_t nx) {
          if (mask(ny, nx) && !seen(ny, nx)) {
            seen(ny, nx) = 1;
            frontier.emplace(ny, nx);
          }
        };
        if (y > 0) visit(y - 1, x);
        if (y + 1 < rows) visit(y + 1, x);
        if (x > 0) visit(y, x - 1);
        if (x + 1 < cols) visit(y, x + 1);
      }
      if (area > best_area) {
        best_area = area;
        best = BoundingBox{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0 + 1),
                           static_cast<int>(y1 - y0 + 1)};
      }
    }
  if (best_area < params.min_area) return std::nullopt;
  return best;
}

}  // namespace calorie::imaging
