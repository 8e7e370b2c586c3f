#include <cmath>

#include "calorie/error.hpp"
#include "calorie/learning.hpp"

namespace calorie::learning {

Standardizer::Standardizer(Vector mean, Vector scale) : mean_(std::move(mean)), scale_(std::move(scale)) {
  require(mean_.size() == scale_.size(), "standardizer: mean/scale length mismatch");
}

Standardizer Standardizer::fit(const Matrix& samples) {
  require(samples.rows() >= 1, "standardizer: no samples");
  const double n = static_cast<double>(samples.rows());
  Vector mean = samples.colwise().mean().transpose();
  Vector scale(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const double var = (samples.col(j).array() - mean(j)).square().sum() / n;
    scale(j) = std::max(std::sqrt(var), kStdFloor);
  }
  return Standardizer(std::move(mean), std::move(scale));
}

void Standardizer::transform_in_place(Matrix& samples) const {
  require(static_cast<std::size_t>(samples.cols()) == dim(), "standardizer: dimension mismatch");
  samples.rowwise() -= mean_.transpose();
  samples.array().rowwise() /= scale_.transpose().array();
}

Matrix Standardizer::transform(const Matrix& samples) const {
  Matrix out = samples;
  transform_in_place(out);
  return out;
}

Vector Standardizer::transform(const Vector& sample) const {
  require(static_cast<std::size_t>(sample.size()) == dim(), "standardizer: dimension mismatch");
  return ((sample - mean_).array() / scale_.array()).matrix();
}

Matrix Standardizer::inverse(const Matrix& samples) const {
  require(static_cast<std::size_t>(samples.cols()) == dim(), "standardizer: dimension mismatch");
  Matrix out = samples;
  out.array().rowwise() *= scale_.transpose().array();
  out.rowwise() += mean_.transpose();
  return out;
}

std::vector<double> recent_history(std::span<const double> series, std::size_t tick, std::size_t d) {
  std::vector<double> out(d);
  if (d == 0) return out;
  require(!series.empty(), "recent_history: empty series");
  for (std::size_t i = 0; i < d; ++i) {
    const auto pos = static_cast<std::ptrdiff_t>(tick) - static_cast<std::ptrdiff_t>(d) + static_cast<std::ptrdiff_t>(i);
    out[i] = pos < 0 ? series[0] : series[static_cast<std::size_t>(pos)];
  }
  return out;
}

std::vector<double> build_recurrent_sample(std::span<const double> pooled, std::span<const double> recent) {
  std::vector<double> out;
  out.reserve(pooled.size() + recent.size());
  out.insert(out.end(), pooled.begin(), pooled.end());
  out.insert(out.end(), recent.begin(), recent.end());
  return out;
}

}  // namespace calorie::learning
