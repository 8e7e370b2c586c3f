#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "calorie/grid.hpp"

namespace calorie::features {

struct SpatialPyramidConfig {
  int bins = 9;                    // orientation bins over [0, 2pi)
  std::vector<int> levels{1, 2};   // grid side per level
  double min_magnitude = 0.1;      // px/frame
  double epsilon = 1e-5;

  void validate() const;
  std::size_t length() const;
};

/// Magnitude-weighted flow-orientation histograms over a spatial pyramid.
/// Cells are concatenated level by level, row-major inside a level, and each
/// cell histogram is L2-normalised.
std::vector<double> flow_pyramid_histogram(const ScalarGrid& u, const ScalarGrid& v,
                                           const SpatialPyramidConfig& cfg = {});

struct HogConfig {
  int cell = 10;
  int bins = 9;  // unsigned, over [0, pi)
  int block = 2;
  int block_stride = 1;
  double epsilon = 1e-5;

  void validate(int side) const;
  std::size_t length(int side) const;
};

/// Dalal-Triggs style HOG over a square depth patch.
std::vector<double> depth_hog(const ScalarGrid& patch, const HogConfig& cfg = {});

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;  // k x D, orthonormal rows
  Eigen::VectorXd explained_variance;
  double total_variance = 0.0;
  bool degenerate = false;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  std::size_t k() const { return static_cast<std::size_t>(basis.rows()); }
};

struct PcaParams {
  std::size_t max_k = 150;
  double var_target = 0.95;
};

/// Samples are the rows of `samples`.
PcaModel pca_fit(const Eigen::MatrixXd& samples, const PcaParams& params = {});

Eigen::VectorXd pca_project(const PcaModel& model, const Eigen::VectorXd& x);
Eigen::VectorXd pca_reconstruct(const PcaModel& model, const Eigen::VectorXd& coords);

struct FrameDescriptor {
  std::size_t frame_index = 0;
  std::vector<double> flow_part;
  std::vector<double> depth_part;
  std::vector<double> combined;
};

FrameDescriptor build_frame_descriptor(std::vector<double> flow_hist, std::vector<double> depth_proj,
                                       std::size_t frame_index);

}  // namespace calorie::features
