#include "calorie/optflow.hpp"

#include <cmath>

namespace calorie::optflow {
namespace {

constexpr double kEdgeWeight = 1.0 / 6.0;
constexpr double kDiagWeight = 1.0 / 12.0;

// Zero-bordered copy so that neighbour sums need no bounds checks.
class Padded {
 public:
  Padded(std::size_t rows, std::size_t cols) : cols_(cols + 2), data_((rows + 2) * (cols + 2), 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data_[(r + 1) * cols_ + c + 1]; }
  double at(std::size_t r, std::size_t c) const { return data_[(r + 1) * cols_ + c + 1]; }
  // Weighted neighbour sum of interior pixel (r, c).
  double neighbour_sum(std::size_t r, std::size_t c) const {
    const double* up = &data_[r * cols_ + c + 1];
    const double* mid = up + cols_;
    const double* down = mid + cols_;
    return kEdgeWeight * (up[0] + down[0] + mid[-1] + mid[1]) +
           kDiagWeight * (up[-1] + up[1] + down[-1] + down[1]);
  }

 private:
  std::size_t cols_;
  std::vector<double> data_;
};

ScalarGrid neighbour_mass(std::size_t rows, std::size_t cols) {
  ScalarGrid mass(rows, cols);
  const auto inside = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    return r >= 0 && c >= 0 && r < static_cast<std::ptrdiff_t>(rows) && c < static_cast<std::ptrdiff_t>(cols);
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (!inside(static_cast<std::ptrdiff_t>(r) + dr, static_cast<std::ptrdiff_t>(c) + dc)) continue;
          s += (dr == 0 || dc == 0) ? kEdgeWeight : kDiagWeight;
        }
      mass(r, c) = s;
    }
  return mass;
}

}  // namespace

Derivatives image_derivatives(const ScalarGrid& prev, const ScalarGrid& next, double presmooth_sigma) {
  require(prev.same_shape(next), "dense_flow: frame size mismatch");
  const ScalarGrid a = imaging::gaussian_blur(prev, presmooth_sigma);
  const ScalarGrid b = imaging::gaussian_blur(next, presmooth_sigma);
  Derivatives d{ScalarGrid(a.rows(), a.cols()), ScalarGrid(a.rows(), a.cols()), ScalarGrid(a.rows(), a.cols())};
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const auto y = static_cast<std::ptrdiff_t>(r);
      const auto x = static_cast<std::ptrdiff_t>(c);
      const double a00 = a.clamped(y, x), a01 = a.clamped(y, x + 1);
      const double a10 = a.clamped(y + 1, x), a11 = a.clamped(y + 1, x + 1);
      const double b00 = b.clamped(y, x), b01 = b.clamped(y, x + 1);
      const double b10 = b.clamped(y + 1, x), b11 = b.clamped(y + 1, x + 1);
      d.ex(r, c) = 0.25 * ((a01 - a00) + (a11 - a10) + (b01 - b00) + (b11 - b10));
      d.ey(r, c) = 0.25 * ((a10 - a00) + (a11 - a01) + (b10 - b00) + (b11 - b01));
      d.et(r, c) = 0.25 * ((b00 - a00) + (b01 - a01) + (b10 - a10) + (b11 - a11));
    }
  return d;
}

double horn_schunck_energy(const Derivatives& d, const FlowField& flow, double alpha) {
  const std::size_t rows = flow.rows();
  const std::size_t cols = flow.cols();
  double data = 0.0;
  double smooth = 0.0;
  const auto pair = [&](std::size_t r, std::size_t c, std::size_t r2, std::size_t c2, double w) {
    const double du = flow.u(r, c) - flow.u(r2, c2);
    const double dv = flow.v(r, c) - flow.v(r2, c2);
    smooth += w * (du * du + dv * dv);
  };
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double res = d.ex(r, c) * flow.u(r, c) + d.ey(r, c) * flow.v(r, c) + d.et(r, c);
      data += res * res;
      if (c + 1 < cols) pair(r, c, r, c + 1, kEdgeWeight);
      if (r + 1 < rows) {
        pair(r, c, r + 1, c, kEdgeWeight);
        if (c + 1 < cols) pair(r, c, r + 1, c + 1, kDiagWeight);
        if (c > 0) pair(r, c, r + 1, c - 1, kDiagWeight);
      }
    }
  return data + alpha * alpha * smooth;
}

FlowField dense_flow(const ScalarGrid& prev, const ScalarGrid& next, const FlowParams& params,
                     std::vector<double>* energy_trace) {
  require(prev.same_shape(next), "dense_flow: frame size mismatch");
  require(params.iterations >= 0, "dense_flow: negative iteration count");
  const std::size_t rows = prev.rows();
  const std::size_t cols = prev.cols();
  const Derivatives d = image_derivatives(prev, next, params.presmooth_sigma);
  const ScalarGrid mass = neighbour_mass(rows, cols);
  const double a2 = params.alpha * params.alpha;

  Padded u(rows, cols), v(rows, cols), u_next(rows, cols), v_next(rows, cols);
  FlowField flow(rows, cols);
  const auto export_flow = [&] {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        flow.u(r, c) = u.at(r, c);
        flow.v(r, c) = v.at(r, c);
      }
  };
  if (energy_trace) energy_trace->push_back(horn_schunck_energy(d, flow, params.alpha));

  for (int it = 0; it < params.iterations; ++it) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const double s = mass(r, c);
        const double ubar = u.neighbour_sum(r, c) / s;
        const double vbar = v.neighbour_sum(r, c) / s;
        const double ex = d.ex(r, c);
        const double ey = d.ey(r, c);
        const double t = (ex * ubar + ey * vbar + d.et(r, c)) / (a2 * s + ex * ex + ey * ey);
        u_next.at(r, c) = ubar - ex * t;
        v_next.at(r, c) = vbar - ey * t;
      }
    std::swap(u, u_next);
    std::swap(v, v_next);
    if (energy_trace) {
      export_flow();
      energy_trace->push_back(horn_schunck_energy(d, flow, params.alpha));
    }
  }
  export_flow();
  return flow;
}

FlowPatch resample_flow(const FlowField& flow, const imaging::BoundingBox& bbox, int side, int median_kernel) {
  FlowPatch patch{imaging::normalize_bbox_patch(flow.u, bbox, side, 0.0),
                  imaging::normalize_bbox_patch(flow.v, bbox, side, 0.0)};
  const double scale = patch.u.scale;
  for (double& x : patch.u.data.values()) x *= scale;
  for (double& x : patch.v.data.values()) x *= scale;
  patch.u.data = imaging::median_filter(patch.u.data, median_kernel);
  patch.v.data = imaging::median_filter(patch.v.data, median_kernel);
  return patch;
}

}  // namespace calorie::optflow
