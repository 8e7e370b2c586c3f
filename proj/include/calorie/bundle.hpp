#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "calorie/pipeline.hpp"

namespace calorie::bundle {

inline constexpr std::uint32_t kVersion = 1;

/// "CALBNDL\0", u32 version, u64-prefixed JSON header, then named float64 blocks
/// (u32 name length, name, u64 rows, u64 cols, row-major data), all little-endian.
std::vector<std::uint8_t> serialize(const pipeline::TrainedEstimator& est);
pipeline::TrainedEstimator deserialize(std::span<const std::uint8_t> bytes, const std::string& source = "bundle");

void save(const std::filesystem::path& path, const pipeline::TrainedEstimator& est);
pipeline::TrainedEstimator load(const std::filesystem::path& path);

}  // namespace calorie::bundle
