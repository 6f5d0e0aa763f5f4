#pragma once

#include "twr/core/array2d.hpp"
#include "twr/em/grid.hpp"

namespace twr::em {

// Diagonal relative permittivity per Ez node of the padded grid. The media are
// non-magnetic and lossless (mu_r = 1, sigma = 0) throughout.
struct MaterialMap {
  Array2D<double> eps_xx;
  Array2D<double> eps_yy;
  Array2D<double> eps_zz;
  static constexpr double mu_r = 1.0;
  static constexpr double sigma = 0.0;

  MaterialMap() = default;
  explicit MaterialMap(const GridSpec& g)
      : eps_xx(g.total_x(), g.total_y(), 1.0),
        eps_yy(g.total_x(), g.total_y(), 1.0),
        eps_zz(g.total_x(), g.total_y(), 1.0) {}

  static MaterialMap vacuum(const GridSpec& g) { return MaterialMap(g); }

  bool matches(const GridSpec& g) const noexcept {
    return eps_zz.nx() == g.total_x() && eps_zz.ny() == g.total_y() && eps_xx.same_shape(eps_zz) &&
           eps_yy.same_shape(eps_zz);
  }

  friend bool operator==(const MaterialMap&, const MaterialMap&) = default;
};

}  // namespace twr::em
