#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "calorie/grid.hpp"

namespace calorie::imaging {

inline constexpr double kFrameRateHz = 30.0;
inline constexpr int kDefaultPatchSide = 60;

struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersects `box` with a rows x cols image. Empty intersection yields nullopt.
std::optional<BoundingBox> clamp_box(const BoundingBox& box, std::size_t rows, std::size_t cols);

struct FrameBundle {
  std::size_t index = 0;
  double time_s = 0.0;
  RgbImage rgb;
  DepthImage depth;  // millimetres
  std::optional<BoundingBox> bbox;
};

inline double frame_time(std::size_t index) { return static_cast<double>(index) / kFrameRateHz; }

struct NormalizedPatch {
  ScalarGrid data;  // side x side
  int side = kDefaultPatchSide;
  double scale = 1.0;
  // Placement of the resized content inside the square.
  int content_x = 0;
  int content_y = 0;
  int content_w = 0;
  int content_h = 0;
};

/// Geometry shared by every channel normalised from the same box.
struct PatchGeometry {
  BoundingBox source;  // clamped
  double scale = 1.0;
  int content_x = 0;
  int content_y = 0;
  int content_w = 0;
  int content_h = 0;
};

PatchGeometry patch_geometry(const BoundingBox& bbox, std::size_t rows, std::size_t cols, int side);

/// Crops `bbox` from `image`, resizes it bilinearly so that its longer side
/// becomes `side`, and centres it in a side x side square filled with `pad_value`.
/// Throws Error("empty person region") if the clamped box has no area.
NormalizedPatch normalize_bbox_patch(const ScalarGrid& image, const BoundingBox& bbox, int side,
                                     double pad_value);

/// Bilinear sample at fractional (y, x), clamping coordinates to [lo, hi] per axis.
double sample_bilinear(const ScalarGrid& image, double y, double x, double y_lo, double y_hi, double x_lo,
                       double x_hi);

/// k x k median with replicate borders. k must be odd.
ScalarGrid median_filter(const ScalarGrid& grid, int k = 5);

/// ITU-R BT.601 luma.
ScalarGrid to_grayscale(const RgbImage& rgb);

ScalarGrid depth_to_scalar(const DepthImage& depth);

/// Separable Gaussian blur with replicate borders; sigma <= 0 returns the input.
ScalarGrid gaussian_blur(const ScalarGrid& grid, double sigma);

struct BreathSample {
  double time_s = 0.0;
  double kcal_per_min = 0.0;

  friend bool operator==(const BreathSample&, const BreathSample&) = default;
};

/// Centred moving average over `span` samples; the window is truncated at the ends.
std::vector<BreathSample> smooth_breaths(std::span<const BreathSample> readings, int span = 20);

/// Linear interpolation of a time-ordered trace at t seconds, clamped to its ends.
double rate_at_frame(std::span<const BreathSample> smoothed, double t);

/// Per-pixel depth background (mode over sampled frames) for the fallback detector.
class DepthBackground {
 public:
  DepthBackground(std::size_t rows, std::size_t cols, int bin_mm = 100, int max_mm = 10000);

  void add(const DepthImage& depth);
  /// Centre of the most populated bin per pixel, 0 where nothing valid was seen.
  DepthImage mode() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  int bin_mm_;
  int bins_;
  std::vector<std::uint32_t> counts_;
};

struct DetectorParams {
  int near_mm = 500;
  int far_mm = 4500;
  int foreground_margin_mm = 150;
  int min_area = 20;
};

/// Largest 4-connected component of in-range depth pixels nearer than the background.
std::optional<BoundingBox> detect_person(const DepthImage& depth, const DepthImage& background,
                                         const DetectorParams& params = {});

}  // namespace calorie::imaging
