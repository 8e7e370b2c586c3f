#include "calorie/pooling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "calorie/error.hpp"

namespace calorie::pooling {

std::vector<Segment> segment_bounds(std::size_t frames, int levels) {
  require(levels >= 1 && levels < 31, "segment_bounds: levels out of range");
  if (frames < (std::size_t{1} << (levels - 1))) throw Error("window shorter than finest level");
  std::vector<Segment> out;
  out.reserve((std::size_t{1} << levels) - 1);
  for (int i = 0; i < levels; ++i) {
    const std::size_t parts = std::size_t{1} << i;
    for (std::size_t k = 0; k < parts; ++k) out.push_back({k * frames / parts, (k + 1) * frames / parts});
  }
  return out;
}

double pool_max(std::span<const double> series, Segment segment) {
  require(segment.begin < segment.end, "pool_max: empty segment");
  require(segment.end <= series.size(), "pool_max: segment outside series");
  return *std::max_element(series.begin() + static_cast<std::ptrdiff_t>(segment.begin),
                           series.begin() + static_cast<std::ptrdiff_t>(segment.end));
}

double pool_sum(std::span<const double> series, Segment segment) {
  require(segment.begin < segment.end, "pool_sum: empty segment");
  require(segment.end <= series.size(), "pool_sum: segment outside series");
  double acc = 0.0;
  for (std::size_t t = segment.begin; t < segment.end; ++t) acc += series[t];
  return acc;
}

Eigen::MatrixXd dct_matrix(std::size_t n, std::size_t rows) {
  require(n >= 1, "dct_matrix: empty length");
  rows = std::min(rows, n);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  const double dn = static_cast<double>(n);
  for (std::size_t k = 0; k < rows; ++k) {
    const double scale = k == 0 ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn);
    for (std::size_t t = 0; t < n; ++t)
      m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) =
          scale * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(t) + 1.0) / (2.0 * dn));
  }
  return m;
}

std::vector<double> pool_dct(std::span<const double> series, int j) {
  require(!series.empty(), "pool_dct: empty series");
  require(j >= 1, "pool_dct: j must be >= 1");
  const Eigen::MatrixXd m = dct_matrix(series.size(), static_cast<std::size_t>(j));
  const Eigen::Map<const Eigen::VectorXd> s(series.data(), static_cast<Eigen::Index>(series.size()));
  const Eigen::VectorXd d = m * s;
  std::vector<double> out(static_cast<std::size_t>(j), 0.0);
  for (Eigen::Index k = 0; k < d.size(); ++k) out[static_cast<std::size_t>(k)] = std::abs(d(k));
  return out;
}

void PoolingConfig::validate() const {
  require(levels >= 1 && levels < 31, "pooling: levels must be >= 1");
  require(use_max || use_sum || use_dct, "pooling: operator set is empty");
  require(!use_dct || dct_coefficients >= 1, "pooling: dct coefficient count must be >= 1");
}

std::size_t PoolingConfig::values_per_feature() const {
  return (use_max ? 1u : 0u) + (use_sum ? 1u : 0u) + (use_dct ? static_cast<std::size_t>(dct_coefficients) : 0u);
}

TemporalPyramid::TemporalPyramid(PoolingConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const Eigen::MatrixXd& TemporalPyramid::basis(std::size_t length) {
  auto it = bases_.find(length);
  if (it == bases_.end())
    it = bases_.emplace(length, dct_matrix(length, static_cast<std::size_t>(cfg_.dct_coefficients))).first;
  return it->second;
}

std::vector<double> TemporalPyramid::pool(const Eigen::Ref<const Eigen::MatrixXd>& frames) {
  std::vector<double> out(cfg_.output_length(static_cast<std::size_t>(frames.cols())));
  pool_into(frames, out.data());
  return out;
}

void TemporalPyramid::pool_into(const Eigen::Ref<const Eigen::MatrixXd>& frames, double* out) {
  const auto n_frames = static_cast<std::size_t>(frames.rows());
  const Eigen::Index dim = frames.cols();
  const auto j = static_cast<Eigen::Index>(cfg_.dct_coefficients);
  for (const Segment& seg : segment_bounds(n_frames, cfg_.levels)) {
    const auto block = frames.middleRows(static_cast<Eigen::Index>(seg.begin), static_cast<Eigen::Index>(seg.length()));
    if (cfg_.use_max) {
      Eigen::Map<Eigen::RowVectorXd>(out, dim) = block.colwise().maxCoeff();
      out += dim;
    }
    if (cfg_.use_sum) {
      // Sequential accumulation keeps results identical to a plain loop.
      Eigen::Map<Eigen::RowVectorXd> sums(out, dim);
      sums.setZero();
      for (Eigen::Index t = 0; t < block.rows(); ++t) sums += block.row(t);
      out += dim;
    }
    if (cfg_.use_dct) {
      const Eigen::MatrixXd& m = basis(seg.length());
      const Eigen::MatrixXd coeffs = m * block;  // rows: coefficients, cols: features
      for (Eigen::Index n = 0; n < dim; ++n) {
        for (Eigen::Index k = 0; k < j; ++k) out[k] = k < coeffs.rows() ? std::abs(coeffs(k, n)) : 0.0;
        out += j;
      }
    }
  }
}

std::vector<double> pool_window(const Eigen::Ref<const Eigen::MatrixXd>& frames, const PoolingConfig& cfg) {
  TemporalPyramid pyramid(cfg);
  return pyramid.pool(frames);
}

}  // namespace calorie::pooling
