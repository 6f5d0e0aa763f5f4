#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "twr/core/array2d.hpp"
#include "twr/em/grid.hpp"

namespace twr::em {

// Writes the interior part of a field array as CSV, one line per y-row
// (top row = largest y first), columns in increasing x.
inline void write_csv_grid(std::ostream& os, const Array2D<double>& a, const GridSpec& g) {
  const std::size_t i0 = g.pml_cells, j0 = g.pml_cells;
  const std::size_t i1 = std::min(a.nx(), g.pml_cells + g.nx);
  const std::size_t j1 = std::min(a.ny(), g.pml_cells + g.ny);
  char buf[32];
  for (std::size_t jr = j1; jr-- > j0;) {
    for (std::size_t i = i0; i < i1; ++i) {
      std::snprintf(buf, sizeof buf, "%.9g", a(i, jr));
      if (i > i0) os << ',';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace twr::em
