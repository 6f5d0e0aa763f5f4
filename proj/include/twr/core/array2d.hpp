#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace twr {

// Dense row-major 2D array indexed as (i, j) with i along x and j along y.
// Storage is x-major so that a fixed-i column is contiguous along y.
template <typename T>
class Array2D {
 public:
  Array2D() = default;
  Array2D(std::size_t nx, std::size_t ny, T init = T{}) : nx_(nx), ny_(ny), data_(nx * ny, init) {}

  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * ny_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * ny_ + j]; }

  T* row(std::size_t i) noexcept { return data_.data() + i * ny_; }
  const T* row(std::size_t i) const noexcept { return data_.data() + i * ny_; }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Array2D& o) const noexcept { return nx_ == o.nx_ && ny_ == o.ny_; }
  friend bool operator==(const Array2D&, const Array2D&) = default;

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<T> data_;
};

}  // namespace twr
