#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "calorie/grid.hpp"
#include "calorie/imaging.hpp"

namespace calorie::optflow {

struct FlowField {
  ScalarGrid u;  // horizontal displacement, px/frame
  ScalarGrid v;  // vertical displacement, px/frame

  FlowField() = default;
  FlowField(std::size_t rows, std::size_t cols) : u(rows, cols, 0.0), v(rows, cols, 0.0) {}
  std::size_t rows() const { return u.rows(); }
  std::size_t cols() const { return u.cols(); }
};

struct FlowParams {
  double alpha = 15.0;
  int iterations = 100;
  double presmooth_sigma = 1.0;
};

/// Spatio-temporal intensity derivatives on the 2x2x2 cube of each pixel.
struct Derivatives {
  ScalarGrid ex;
  ScalarGrid ey;
  ScalarGrid et;
};

Derivatives image_derivatives(const ScalarGrid& prev, const ScalarGrid& next, double presmooth_sigma);

/// Horn-Schunck objective: brightness-constancy residual plus alpha^2 times
/// the weighted squared differences over 8-neighbour pairs (1/6 edge, 1/12 diagonal).
double horn_schunck_energy(const Derivatives& d, const FlowField& flow, double alpha);

/// Dense Horn-Schunck flow from `prev` to `next` (grayscale, same size).
/// When `energy_trace` is given it receives the objective before the first and
/// after every Jacobi sweep.
FlowField dense_flow(const ScalarGrid& prev, const ScalarGrid& next, const FlowParams& params = {},
                     std::vector<double>* energy_trace = nullptr);

struct FlowPatch {
  imaging::NormalizedPatch u;
  imaging::NormalizedPatch v;
};

/// Crops the flow to `bbox`, resamples into the normalised square, rescales the
/// displacements by the resize factor and median-filters each component.
FlowPatch resample_flow(const FlowField& flow, const imaging::BoundingBox& bbox, int side = imaging::kDefaultPatchSide,
                        int median_kernel = 5);

// Middlebury .flo files.
inline constexpr float kFloMagic = 202021.25f;
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(const std::vector<std::uint8_t>& bytes);
void write_flo(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);

}  // namespace calorie::optflow
