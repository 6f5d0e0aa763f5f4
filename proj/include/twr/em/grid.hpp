#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "twr/core/error.hpp"

namespace twr::em {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kEps0 = 1.0 / (kMu0 * kSpeedOfLight * kSpeedOfLight);
inline constexpr double kEta0 = kMu0 * kSpeedOfLight;

// Cell sizing uses the rounded c = 3e8 m/s so that 3 GHz gives exactly
// lambda/10 = 1 cm cells; field updates use the exact constants above.
inline constexpr double kNominalSpeedOfLight = 3.0e8;
inline constexpr int kCellsPerWavelength = 10;

// Interior is nx x ny cells of size dx x dy; pml_cells of absorbing layer are
// added on every side, so arrays are (nx + 2*pml) x (ny + 2*pml).
struct GridSpec {
  std::size_t nx = 0;
  std::size_t ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  double dt = 0.0;
  double courant = 0.0;
  std::size_t pml_cells = 0;

  std::size_t total_x() const noexcept { return nx + 2 * pml_cells; }
  std::size_t total_y() const noexcept { return ny + 2 * pml_cells; }

  // Interior cell index holding the physical coordinate (meters, interior frame).
  long cell_x(double x) const noexcept { return static_cast<long>(std::floor(x / dx + 1e-9)); }
  long cell_y(double y) const noexcept { return static_cast<long>(std::floor(y / dy + 1e-9)); }

  // Array index of an interior cell.
  std::size_t node_x(long cell) const noexcept { return static_cast<std::size_t>(cell + static_cast<long>(pml_cells)); }
  std::size_t node_y(long cell) const noexcept { return static_cast<std::size_t>(cell + static_cast<long>(pml_cells)); }

  // Physical centre of array node (i, j) in the interior frame (may be negative in the PML).
  double node_center_x(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(pml_cells) + 0.5) * dx;
  }
  double node_center_y(std::size_t j) const noexcept {
    return (static_cast<double>(j) - static_cast<double>(pml_cells) + 0.5) * dy;
  }

  bool interior_x(long cell) const noexcept { return cell >= 0 && cell < static_cast<long>(nx); }
  bool interior_y(long cell) const noexcept { return cell >= 0 && cell < static_cast<long>(ny); }

  double width() const noexcept { return static_cast<double>(nx) * dx; }
  double height() const noexcept { return static_cast<double>(ny) * dy; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// Largest stable step for the 2D Yee scheme scaled by the Courant number.
inline double stable_time_step(double dx, double dy, double courant) {
  return courant / (kSpeedOfLight * std::sqrt(1.0 / (dx * dx) + 1.0 / (dy * dy)));
}

inline GridSpec make_grid(double domain_size_m, double frequency_hz,
                          double courant = 1.0 / std::numbers::sqrt2, std::size_t pml_cells = 10) {
  if (!(domain_size_m > 0.0)) throw InvalidArgument("make_grid: domain size must be positive");
  if (!(frequency_hz > 0.0)) throw InvalidArgument("make_grid: frequency must be positive");
  if (!(courant > 0.0 && courant <= 1.0)) throw InvalidArgument("make_grid: courant number must lie in (0, 1]");
  GridSpec g;
  g.dx = g.dy = kNominalSpeedOfLight / frequency_hz / kCellsPerWavelength;
  const auto n = static_cast<std::size_t>(std::llround(domain_size_m / g.dx));
  if (n < 3) throw InvalidArgument("make_grid: domain smaller than three cells");
  g.nx = g.ny = n;
  g.courant = courant;
  g.dt = stable_time_step(g.dx, g.dy, courant);
  g.pml_cells = pml_cells;
  return g;
}

}  // namespace twr::em
