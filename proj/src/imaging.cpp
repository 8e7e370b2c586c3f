#include "calorie/imaging.hpp"

#include <algorithm>
#include <cmath>

namespace calorie::imaging {

std::optional<BoundingBox> clamp_box(const BoundingBox& box, std::size_t rows, std::size_t cols) {
  const long x0 = std::max<long>(box.x, 0);
  const long y0 = std::max<long>(box.y, 0);
  const long x1 = std::min<long>(static_cast<long>(box.x) + box.w, static_cast<long>(cols));
  const long y1 = std::min<long>(static_cast<long>(box.y) + box.h, static_cast<long>(rows));
  if (box.w <= 0 || box.h <= 0 || x1 <= x0 || y1 <= y0) return std::nullopt;
  return BoundingBox{static_cast<int>(x0), static_cast<int>(y0), static_cast<int>(x1 - x0),
                     static_cast<int>(y1 - y0)};
}

PatchGeometry patch_geometry(const BoundingBox& bbox, std::size_t rows, std::size_t cols, int side) {
  require(side > 0, "patch side must be positive");
  const auto clamped = clamp_box(bbox, rows, cols);
  if (!clamped) throw Error("empty person region");

  PatchGeometry g;
  g.source = *clamped;
  const int longer = std::max(clamped->w, clamped->h);
  g.scale = static_cast<double>(side) / longer;
  g.content_w = std::clamp(static_cast<int>(std::lround(clamped->w * g.scale)), 1, side);
  g.content_h = std::clamp(static_cast<int>(std::lround(clamped->h * g.scale)), 1, side);
  if (clamped->w >= clamped->h) g.content_w = side;
  if (clamped->h >= clamped->w) g.content_h = side;
  g.content_x = (side - g.content_w) / 2;
  g.content_y = (side - g.content_h) / 2;
  return g;
}

double sample_bilinear(const ScalarGrid& image, double y, double x, double y_lo, double y_hi, double x_lo,
                       double x_hi) {
  y = std::clamp(y, y_lo, y_hi);
  x = std::clamp(x, x_lo, x_hi);
  const double fy = std::floor(y);
  const double fx = std::floor(x);
  const double wy = y - fy;
  const double wx = x - fx;
  const auto r0 = static_cast<std::ptrdiff_t>(fy);
  const auto c0 = static_cast<std::ptrdiff_t>(fx);
  // Neighbours past the clamp range carry zero weight, so replicate access is safe.
  const double a = image.clamped(r0, c0);
  const double b = image.clamped(r0, c0 + 1);
  const double c = image.clamped(r0 + 1, c0);
  const double d = image.clamped(r0 + 1, c0 + 1);
  return (1.0 - wy) * ((1.0 - wx) * a + wx * b) + wy * ((1.0 - wx) * c + wx * d);
}

NormalizedPatch normalize_bbox_patch(const ScalarGrid& image, const BoundingBox& bbox, int side,
                                     double pad_value) {
  const PatchGeometry g = patch_geometry(bbox, image.rows(), image.cols(), side);

  NormalizedPatch patch;
  patch.side = side;
  patch.scale = g.scale;
  patch.content_x = g.content_x;
  patch.content_y = g.content_y;
  patch.content_w = g.content_w;
  patch.content_h = g.content_h;
  patch.data = ScalarGrid(static_cast<std::size_t>(side), static_cast<std::size_t>(side), pad_value);

  const double ry = static_cast<double>(g.source.h) / g.content_h;
  const double rx = static_cast<double>(g.source.w) / g.content_w;
  const double y_lo = g.source.y;
  const double y_hi = g.source.y + g.source.h - 1;
  const double x_lo = g.source.x;
  const double x_hi = g.source.x + g.source.w - 1;
  for (int r = 0; r < g.content_h; ++r) {
    const double sy = g.source.y + (r + 0.5) * ry - 0.5;
    for (int c = 0; c < g.content_w; ++c) {
      const double sx = g.source.x + (c + 0.5) * rx - 0.5;
      patch.data(static_cast<std::size_t>(g.content_y + r), static_cast<std::size_t>(g.content_x + c)) =
          sample_bilinear(image, sy, sx, y_lo, y_hi, x_lo, x_hi);
    }
  }
  return patch;
}

ScalarGrid median_filter(const ScalarGrid& grid, int k) {
  require(k >= 1 && k % 2 == 1, "median filter kernel size must be odd");
  const int h = k / 2;
  ScalarGrid out(grid.rows(), grid.cols());
  if (grid.values().empty()) return out;
  // replicate borders through precomputed clamped indices
  const auto clamp_index = [h](std::size_t n) {
    std::vector<std::size_t> idx(n + 2 * static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < idx.size(); ++i)
      idx[i] = static_cast<std::size_t>(
          std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) - h, 0, static_cast<std::ptrdiff_t>(n) - 1));
    return idx;
  };
  const std::vector<std::size_t> rows = clamp_index(grid.rows());
  const std::vector<std::size_t> cols = clamp_index(grid.cols());
  const auto src = grid.values();
  const std::size_t stride = grid.cols();
  const auto kk = static_cast<std::size_t>(k);
  const std::size_t n = kk * kk;
  const std::size_t padded = cols.size();
  // Each row sweeps a sorted window: sort every padded column once, then per
  // step merge out the leaving column and merge in the entering one.
  std::vector<double> columns(padded * kk);
  std::vector<double> window(n), next(n);
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t j = 0; j < padded; ++j) {
      double* col = columns.data() + j * kk;
      for (std::size_t dr = 0; dr < kk; ++dr) col[dr] = src[rows[r + dr] * stride + cols[j]];
      std::sort(col, col + kk);
    }
    std::copy(columns.begin(), columns.begin() + static_cast<std::ptrdiff_t>(n), window.begin());
    std::sort(window.begin(), window.end());
    out(r, 0) = window[n / 2];
    for (std::size_t c = 1; c < grid.cols(); ++c) {
      const double* leaving = columns.data() + (c - 1) * kk;
      const double* entering = columns.data() + (c - 1 + kk) * kk;
      std::size_t li = 0, ei = 0, o = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = window[i];
        if (li < kk && x == leaving[li]) {
          ++li;
          continue;
        }
        while (ei < kk && entering[ei] < x) next[o++] = entering[ei++];
        next[o++] = x;
      }
      while (ei < kk) next[o++] = entering[ei++];
      window.swap(next);
      out(r, c) = window[n / 2];
    }
  }
  return out;
}

ScalarGrid to_grayscale(const RgbImage& rgb) {
  ScalarGrid out(rgb.rows(), rgb.cols());
  auto dst = out.values();
  auto src = rgb.values();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = 0.299 * src[i].r + 0.587 * src[i].g + 0.114 * src[i].b;
  return out;
}

ScalarGrid depth_to_scalar(const DepthImage& depth) {
  ScalarGrid out(depth.rows(), depth.cols());
  auto dst = out.values();
  auto src = depth.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  return out;
}

ScalarGrid gaussian_blur(const ScalarGrid& grid, double sigma) {
  if (sigma <= 0.0 || grid.empty()) return grid;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    total += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (double& w : kernel) w /= total;

  ScalarGrid tmp(grid.rows(), grid.cols());
  for (std::size_t r = 0; r < grid.rows(); ++r)
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               grid.clamped(static_cast<std::ptrdiff_t>(r), static_cast<std::ptrdiff_t>(c) + i);
      tmp(r, c) = acc;
    }
  ScalarGrid out(grid.rows(), grid.cols());
  for (std::size_t r = 0; r < grid.rows(); ++r)
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i)
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               tmp.clamped(static_cast<std::ptrdiff_t>(r) + i, static_cast<std::ptrdiff_t>(c));
      out(r, c) = acc;
    }
  return out;
}

std::vector<BreathSample> smooth_breaths(std::span<const BreathSample> readings, int span) {
  require(!readings.empty(), "smooth_breaths: empty input");
  require(span >= 1, "smooth_breaths: span must be >= 1");
  const auto n = static_cast<std::ptrdiff_t>(readings.size());
  const std::ptrdiff_t left = span / 2;
  const std::ptrdiff_t right = (span - 1) / 2;
  std::vector<BreathSample> out(readings.begin(), readings.end());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - left);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + right);
    double acc = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += readings[static_cast<std::size_t>(j)].kcal_per_min;
    out[static_cast<std::size_t>(i)].kcal_per_min = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

double rate_at_frame(std::span<const BreathSample> smoothed, double t) {
  require(!smoothed.empty(), "rate_at_frame: empty sequence");
  if (t <= smoothed.front().time_s) return smoothed.front().kcal_per_min;
  if (t >= smoothed.back().time_s) return smoothed.back().kcal_per_min;
  const auto it = std::upper_bound(smoothed.begin(), smoothed.end(), t,
                                   [](double value, const BreathSample& s) { return value < s.time_s; });
  const BreathSample& hi = *it;
  const BreathSample& lo = *(it - 1);
  const double dt = hi.time_s - lo.time_s;
  if (dt <= 0.0) return hi.kcal_per_min;
  const double w = (t - lo.time_s) / dt;
  return lo.kcal_per_min + w * (hi.kcal_per_min - lo.kcal_per_min);
}

}  // namespace calorie::imaging
