#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace calorie::pooling {

/// Frames [begin, end) of a window, zero-based.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - begin; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Level-major temporal pyramid: level i splits [0, T) into 2^i floor-divided parts.
/// Throws if T < 2^(levels-1) ("window shorter than finest level").
std::vector<Segment> segment_bounds(std::size_t frames, int levels);

double pool_max(std::span<const double> series, Segment segment);
double pool_sum(std::span<const double> series, Segment segment);

/// |first j orthonormal DCT-II coefficients|, zero beyond the series length.
std::vector<double> pool_dct(std::span<const double> series, int j);

struct PoolingConfig {
  int levels = 3;
  bool use_max = true;
  bool use_sum = true;
  bool use_dct = true;
  int dct_coefficients = 8;

  void validate() const;
  std::size_t segment_count() const { return (std::size_t{1} << levels) - 1; }
  std::size_t values_per_feature() const;
  std::size_t output_length(std::size_t feature_dim) const { return segment_count() * feature_dim * values_per_feature(); }
};

/// Row k of the orthonormal DCT-II matrix of size n.
Eigen::MatrixXd dct_matrix(std::size_t n, std::size_t rows);

/// Pools windows of per-frame features; caches DCT bases by segment length.
/// `frames` is T x N with one frame per row (the transpose of S).
class TemporalPyramid {
 public:
  explicit TemporalPyramid(PoolingConfig cfg);

  std::vector<double> pool(const Eigen::Ref<const Eigen::MatrixXd>& frames);
  void pool_into(const Eigen::Ref<const Eigen::MatrixXd>& frames, double* out);

  const PoolingConfig& config() const { return cfg_; }

 private:
  const Eigen::MatrixXd& basis(std::size_t length);

  PoolingConfig cfg_;
  std::map<std::size_t, Eigen::MatrixXd> bases_;
};

std::vector<double> pool_window(const Eigen::Ref<const Eigen::MatrixXd>& frames, const PoolingConfig& cfg = {});

}  // namespace calorie::pooling
