#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "calorie/features.hpp"
#include "calorie/imaging.hpp"
#include "calorie/optflow.hpp"
#include "calorie/session.hpp"

namespace calorie::encode {

using FloatRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DoubleRows = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FeatureConfig {
  int patch_side = imaging::kDefaultPatchSide;
  int median_kernel = 5;
  optflow::FlowParams flow;
  features::SpatialPyramidConfig pyramid;
  features::HogConfig hog;
  int flow_margin = 4;          // pixels added around the box for the flow crop
  bool use_source_flow = true;  // prefer flow shipped with the session
  imaging::DetectorParams detector;
  int background_frames = 60;  // frames sampled for the detector's background

  void validate() const;
  std::size_t flow_dim() const { return pyramid.length(); }
  std::size_t hog_dim() const { return hog.length(patch_side); }
  nlohmann::json to_json() const;
  static FeatureConfig from_json(const nlohmann::json& j);
  std::uint64_t hash() const;
};

/// Per-frame features before PCA. Frame 0 has no flow and gets a zero histogram.
struct RawFeatures {
  DoubleRows flow;              // frames x flow_dim
  FloatRows hog;                // frames x hog_dim
  std::vector<std::uint8_t> valid;  // 0 where no person was found

  std::size_t frames() const { return valid.size(); }
};

RawFeatures extract_raw(const Session& session, const FeatureConfig& cfg);

/// PCA over the valid frames of the given sessions, every `frame_stride`-th frame.
features::PcaModel fit_depth_pca(std::span<const RawFeatures* const> sessions, const features::PcaParams& params,
                                 std::size_t frame_stride);

/// frames x (flow_dim + k) descriptors: flow histogram then projected HOG;
/// invalid frames are zero rows.
DoubleRows descriptors(const RawFeatures& raw, const features::PcaModel& pca);

// ---------------------------------------------------------------------------
// Caches: one file per session, keyed by a configuration hash.

void save_raw_cache(const std::filesystem::path& path, const RawFeatures& raw, std::uint64_t hash);
/// nullopt when the file is absent or was written with a different hash.
std::optional<RawFeatures> load_raw_cache(const std::filesystem::path& path, std::uint64_t hash);

void save_matrix_cache(const std::filesystem::path& path, const DoubleRows& m, std::span<const std::uint8_t> valid,
                       std::uint64_t hash);
std::optional<DoubleRows> load_matrix_cache(const std::filesystem::path& path, std::uint64_t hash,
                                            std::vector<std::uint8_t>* valid = nullptr);

/// Raw features through `cache_dir` (no caching when empty).
RawFeatures cached_raw(const Session& session, const FeatureConfig& cfg, const std::filesystem::path& cache_dir);

std::uint64_t pca_hash(const features::PcaModel& pca);

/// One descriptor per frame through `cache_dir`; the key covers cfg and the PCA model.
DoubleRows extract_features(const Session& session, const FeatureConfig& cfg, const features::PcaModel& pca,
                            const std::filesystem::path& cache_dir, std::vector<std::uint8_t>* valid = nullptr);

}  // namespace calorie::encode
