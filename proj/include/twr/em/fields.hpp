#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "twr/core/array2d.hpp"
#include "twr/em/grid.hpp"

namespace twr::em {

// TMz field arrays on the padded Yee grid.
//   ez(i, j)  at (i, j)          (Nx x Ny)
//   hx(i, j)  at (i, j + 1/2)    (Nx x Ny-1)
//   hy(i, j)  at (i + 1/2, j)    (Nx-1 x Ny)
// Ez on the outermost ring of nodes is held at zero.
struct FieldState {
  Array2D<double> ez;
  Array2D<double> hx;
  Array2D<double> hy;
  std::int64_t step = 0;

  FieldState() = default;
  explicit FieldState(const GridSpec& g)
      : ez(g.total_x(), g.total_y()), hx(g.total_x(), g.total_y() - 1), hy(g.total_x() - 1, g.total_y()) {}

  bool matches(const GridSpec& g) const noexcept {
    return ez.nx() == g.total_x() && ez.ny() == g.total_y() && hx.nx() == g.total_x() &&
           hx.ny() + 1 == g.total_y() && hy.nx() + 1 == g.total_x() && hy.ny() == g.total_y();
  }

  bool all_finite() const noexcept {
    for (const auto* a : {&ez, &hx, &hy}) {
      for (double v : a->flat()) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  double max_abs_e() const noexcept {
    double m = 0.0;
    for (double v : ez.flat()) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_h() const noexcept {
    double m = 0.0;
    for (const auto* a : {&hx, &hy}) {
      for (double v : a->flat()) m = std::max(m, std::abs(v));
    }
    return m;
  }

  friend bool operator==(const FieldState&, const FieldState&) = default;
};

}  // namespace twr::em
