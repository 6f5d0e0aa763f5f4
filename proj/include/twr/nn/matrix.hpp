#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "twr/core/error.hpp"

namespace twr::nn {

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), data(r * c, v) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
  double* row(std::size_t i) noexcept { return data.data() + i * cols; }
  const double* row(std::size_t i) const noexcept { return data.data() + i * cols; }
  std::span<const double> row_span(std::size_t i) const noexcept { return {row(i), cols}; }

  Matrix transposed() const {
    Matrix t(cols, rows);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// C (M x N) += A (M x K) * B (K x N), all row-major. Every C element sums its
// K products in increasing k, independent of blocking, so results do not
// depend on how a batch is chunked.
inline void gemm_accumulate(std::size_t m, std::size_t n, std::size_t k, const double* __restrict a,
                            const double* __restrict b, double* __restrict c) {
  constexpr std::size_t kColBlock = 256;
  for (std::size_t j0 = 0; j0 < n; j0 += kColBlock) {
    const std::size_t nb = std::min(kColBlock, n - j0);
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      double* c0 = c + (i + 0) * n + j0;
      double* c1 = c + (i + 1) * n + j0;
      double* c2 = c + (i + 2) * n + j0;
      double* c3 = c + (i + 3) * n + j0;
      const double* a0 = a + (i + 0) * k;
      const double* a1 = a + (i + 1) * k;
      const double* a2 = a + (i + 2) * k;
      const double* a3 = a + (i + 3) * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * n + j0;
        const double v0 = a0[p], v1 = a1[p], v2 = a2[p], v3 = a3[p];
        for (std::size_t j = 0; j < nb; ++j) {
          const double bj = bp[j];
          c0[j] += v0 * bj;
          c1[j] += v1 * bj;
          c2[j] += v2 * bj;
          c3[j] += v3 * bj;
        }
      }
    }
    for (; i < m; ++i) {
      double* ci = c + i * n + j0;
      const double* ai = a + i * k;
      for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * n + j0;
        const double v = ai[p];
        for (std::size_t j = 0; j < nb; ++j) ci[j] += v * bp[j];
      }
    }
  }
}

inline void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) throw InvalidArgument("gemm: shape mismatch");
  gemm_accumulate(a.rows, b.cols, a.cols, a.data.data(), b.data.data(), c.data.data());
}

}  // namespace twr::nn
