#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "calorie/error.hpp"

namespace calorie {

/// Dense row-major 2-D array. Rows are image y, columns image x.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  /// Replicate-border access: out-of-range coordinates clamp to the nearest edge.
  const T& clamped(std::ptrdiff_t r, std::ptrdiff_t c) const {
    const auto rr = r < 0 ? 0 : (r >= static_cast<std::ptrdiff_t>(rows_) ? rows_ - 1 : static_cast<std::size_t>(r));
    const auto cc = c < 0 ? 0 : (c >= static_cast<std::ptrdiff_t>(cols_) ? cols_ - 1 : static_cast<std::size_t>(c));
    return data_[rr * cols_ + cc];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  bool same_shape(const Grid& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using ScalarGrid = Grid<double>;
using RgbImage = Grid<Rgb>;
using DepthImage = Grid<std::uint16_t>;

}  // namespace calorie
