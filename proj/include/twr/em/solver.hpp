#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/em/fields.hpp"
#include "twr/em/grid.hpp"
#include "twr/em/material.hpp"

namespace twr::em {

enum class Waveform : std::uint8_t {
  ramped_sine,     // continuous sine with a linear switch-on ramp
  gaussian_pulse,  // Gaussian-windowed sine burst
};

// Soft line source along a full row of Ez nodes.
struct SourceSpec {
  double row_y = 1.60;            // meters, interior frame
  double frequency = 3.0e9;       // Hz
  double amplitude = 1.0;         // V/m added per step at full envelope
  double envelope_periods = 2.0;  // ramp length, or Gaussian 1/e half-width for pulses
  Waveform waveform = Waveform::ramped_sine;
};

// Graded-conductivity absorbing layer in convolutional (CPML) form. With
// kappa = 1 and alpha = 0 it reduces to the split-field Berenger layer.
struct PmlSpec {
  int grading_order = 3;
  // sigma_max as a multiple of the usual optimum 0.8 (m + 1) / (eta0 * dx).
  double sigma_scale = 1.0;
  double alpha_max = 0.0;  // S/m, complex-frequency shift at the inner edge
};

namespace detail {

// Ez += dt/(eps0 eps_zz) * curl H, precomputed per node.
inline Array2D<double> e_update_coefficients(const MaterialMap& m, const GridSpec& g) {
  Array2D<double> c(g.total_x(), g.total_y());
  auto out = c.flat();
  auto eps = m.eps_zz.flat();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = g.dt / (kEps0 * eps[k]);
  return c;
}

inline void update_h(FieldState& s, const GridSpec& g) {
  const std::size_t nx = g.total_x();
  const std::size_t ny = g.total_y();
  const double chx = g.dt / (kMu0 * g.dy);
  const double chy = g.dt / (kMu0 * g.dx);
  for (std::size_t i = 0; i < nx; ++i) {
    const double* ez = s.ez.row(i);
    double* hx = s.hx.row(i);
    for (std::size_t j = 0; j + 1 < ny; ++j) hx[j] -= chx * (ez[j + 1] - ez[j]);
  }
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    const double* ez0 = s.ez.row(i);
    const double* ez1 = s.ez.row(i + 1);
    double* hy = s.hy.row(i);
    for (std::size_t j = 0; j < ny; ++j) hy[j] += chy * (ez1[j] - ez0[j]);
  }
}

inline void update_e(FieldState& s, const Array2D<double>& coef, const GridSpec& g) {
  const std::size_t nx = g.total_x();
  const std::size_t ny = g.total_y();
  const double rdx = 1.0 / g.dx;
  const double rdy = 1.0 / g.dy;
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    double* ez = s.ez.row(i);
    const double* c = coef.row(i);
    const double* hy0 = s.hy.row(i - 1);
    const double* hy1 = s.hy.row(i);
    const double* hx = s.hx.row(i);
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      ez[j] += c[j] * ((hy1[j] - hy0[j]) * rdx - (hx[j] - hx[j - 1]) * rdy);
    }
  }
}

}  // namespace detail

// One lossless leapfrog step (H then E) with every Ez boundary node pinned to
// zero. The absorbing layer is applied by Solver::step instead.
inline void step_fields(FieldState& state, const MaterialMap& materials, const GridSpec& grid) {
  if (!state.matches(grid)) throw InvalidArgument("step_fields: field arrays do not match grid");
  if (!materials.matches(grid)) throw InvalidArgument("step_fields: material map does not match grid");
  detail::update_h(state, grid);
  detail::update_e(state, detail::e_update_coefficients(materials, grid), grid);
  ++state.step;
}

inline double source_value(const SourceSpec& src, double t) {
  if (src.waveform == Waveform::gaussian_pulse) {
    // Peak delayed by three half-widths so the switch-on is below 1.3e-4.
    const double tau = src.envelope_periods / src.frequency;
    const double tc = t - 3.0 * tau;
    return src.amplitude * std::exp(-(tc * tc) / (tau * tau)) * std::sin(2.0 * std::numbers::pi * src.frequency * tc);
  }
  const double ramp_s = src.envelope_periods / src.frequency;
  const double w = ramp_s > 0.0 ? std::min(1.0, t / ramp_s) : 1.0;
  return src.amplitude * w * std::sin(2.0 * std::numbers::pi * src.frequency * t);
}

inline std::size_t source_row_node(const SourceSpec& src, const GridSpec& grid) {
  const long cell = grid.cell_y(src.row_y);
  if (!grid.interior_y(cell)) throw InvalidArgument("apply_source: source row lies outside the interior");
  return grid.node_y(cell);
}

// Additive source at time q*dt on the whole Ez row (absorbing layer included, so
// the row ends do not diffract).
inline void apply_source(FieldState& state, const SourceSpec& src, const GridSpec& grid) {
  if (!(src.frequency > 0.0) || src.envelope_periods < 0.0) {
    throw InvalidArgument("apply_source: frequency must be positive and envelope non-negative");
  }
  const std::size_t j = source_row_node(src, grid);
  const double v = source_value(src, static_cast<double>(state.step) * grid.dt);
  if (v == 0.0) return;
  for (std::size_t i = 1; i + 1 < grid.total_x(); ++i) state.ez(i, j) += v;
}

// 1/2 sum(eps Ez^2 + mu (Hx^2 + Hy^2)) dx dy over the interior nodes. E and H
// are half a step apart, so this is conserved only to O(dt).
inline double total_field_energy(const FieldState& s, const MaterialMap& m, const GridSpec& g) {
  const std::size_t i0 = g.pml_cells, i1 = g.pml_cells + g.nx;
  const std::size_t j0 = g.pml_cells, j1 = g.pml_cells + g.ny;
  double we = 0.0, wh = 0.0;
  for (std::size_t i = i0; i < i1; ++i) {
    for (std::size_t j = j0; j < j1; ++j) {
      const double e = s.ez(i, j);
      we += m.eps_zz(i, j) * e * e;
      if (j < s.hx.ny()) wh += s.hx(i, j) * s.hx(i, j);
      if (i < s.hy.nx()) wh += s.hy(i, j) * s.hy(i, j);
    }
  }
  return 0.5 * (kEps0 * we + kMu0 * wh) * g.dx * g.dy;
}

// Time stepper with convolutional PML on all four sides.
class Solver {
 public:
  Solver(GridSpec grid, const MaterialMap& materials, PmlSpec pml = {})
      : grid_(grid), coef_(detail::e_update_coefficients(materials, grid)) {
    if (!materials.matches(grid)) throw InvalidArgument("Solver: material map does not match grid");
    const std::size_t nx = grid.total_x(), ny = grid.total_y();
    ax_e_ = profile(nx, nx, grid.dx, pml, false);
    ax_h_ = profile(nx - 1, nx, grid.dx, pml, true);
    ay_e_ = profile(ny, ny, grid.dy, pml, false);
    ay_h_ = profile(ny - 1, ny, grid.dy, pml, true);
    psi_ez_x_ = Array2D<double>(nx, ny);
    psi_ez_y_ = Array2D<double>(nx, ny);
    psi_hx_y_ = Array2D<double>(nx, ny - 1);
    psi_hy_x_ = Array2D<double>(nx - 1, ny);
  }

  const GridSpec& grid() const noexcept { return grid_; }

  void step(FieldState& s) {
    if (!s.matches(grid_)) throw InvalidArgument("Solver::step: field arrays do not match grid");
    detail::update_h(s, grid_);
    correct_h(s);
    detail::update_e(s, coef_, grid_);
    correct_e(s);
    ++s.step;
  }

  // Clears the auxiliary absorbing-layer state (use with a fresh FieldState).
  void reset() {
    psi_ez_x_.fill(0.0);
    psi_ez_y_.fill(0.0);
    psi_hx_y_.fill(0.0);
    psi_hy_x_.fill(0.0);
  }

 private:
  // Recursive-convolution coefficients along one axis.
  struct Axis {
    std::vector<double> b, c;
    std::vector<std::size_t> active;  // indices with nonzero conductivity
  };

  Axis profile(std::size_t n, std::size_t total, double d, const PmlSpec& pml, bool staggered) const {
    Axis a;
    a.b.assign(n, 1.0);
    a.c.assign(n, 0.0);
    if (grid_.pml_cells == 0) return a;
    const auto cells = static_cast<double>(grid_.pml_cells);
    const double thickness = cells * d;
    const double m = pml.grading_order;
    const double sigma_max = pml.sigma_scale * 0.8 * (m + 1.0) / (kEta0 * d);
    // Positions in cell units on the padded axis: Ez nodes sit at cell centres
    // (k + 1/2), staggered H nodes on the faces between them (k + 1).
    const double lo = cells;
    const double hi = static_cast<double>(total) - cells;
    for (std::size_t k = 0; k < n; ++k) {
      const double pos = static_cast<double>(k) + (staggered ? 1.0 : 0.5);
      double depth = 0.0;
      if (pos < lo) depth = (lo - pos) * d;
      if (pos > hi) depth = (pos - hi) * d;
      if (depth <= 0.0) continue;
      const double r = std::min(1.0, depth / thickness);
      const double sigma = sigma_max * std::pow(r, m);
      const double alpha = pml.alpha_max * (1.0 - r);
      const double b = std::exp(-(sigma + alpha) * grid_.dt / kEps0);
      a.b[k] = b;
      a.c[k] = sigma / (sigma + alpha) * (b - 1.0);
      a.active.push_back(k);
    }
    return a;
  }

  void correct_h(FieldState& s) {
    const std::size_t nx = grid_.total_x(), ny = grid_.total_y();
    const double chx = grid_.dt / kMu0;
    // Hx sees d/dy: absorbing along y.
    for (std::size_t i = 0; i < nx; ++i) {
      const double* ez = s.ez.row(i);
      double* hx = s.hx.row(i);
      double* psi = psi_hx_y_.row(i);
      for (std::size_t j : ay_h_.active) {
        psi[j] = ay_h_.b[j] * psi[j] + ay_h_.c[j] * (ez[j + 1] - ez[j]) / grid_.dy;
        hx[j] -= chx * psi[j];
      }
    }
    // Hy sees d/dx: absorbing along x.
    for (std::size_t i : ax_h_.active) {
      const double* ez0 = s.ez.row(i);
      const double* ez1 = s.ez.row(i + 1);
      double* hy = s.hy.row(i);
      double* psi = psi_hy_x_.row(i);
      const double b = ax_h_.b[i], c = ax_h_.c[i];
      for (std::size_t j = 0; j < ny; ++j) {
        psi[j] = b * psi[j] + c * (ez1[j] - ez0[j]) / grid_.dx;
        hy[j] += chx * psi[j];
      }
    }
  }

  void correct_e(FieldState& s) {
    const std::size_t nx = grid_.total_x(), ny = grid_.total_y();
    for (std::size_t i : ax_e_.active) {
      if (i == 0 || i + 1 >= nx) continue;
      double* ez = s.ez.row(i);
      const double* c = coef_.row(i);
      const double* hy0 = s.hy.row(i - 1);
      const double* hy1 = s.hy.row(i);
      double* psi = psi_ez_x_.row(i);
      const double b = ax_e_.b[i], cc = ax_e_.c[i];
      for (std::size_t j = 1; j + 1 < ny; ++j) {
        psi[j] = b * psi[j] + cc * (hy1[j] - hy0[j]) / grid_.dx;
        ez[j] += c[j] * psi[j];
      }
    }
    for (std::size_t i = 1; i + 1 < nx; ++i) {
      double* ez = s.ez.row(i);
      const double* c = coef_.row(i);
      const double* hx = s.hx.row(i);
      double* psi = psi_ez_y_.row(i);
      for (std::size_t j : ay_e_.active) {
        if (j == 0 || j + 1 >= ny) continue;
        psi[j] = ay_e_.b[j] * psi[j] + ay_e_.c[j] * (hx[j] - hx[j - 1]) / grid_.dy;
        ez[j] -= c[j] * psi[j];
      }
    }
  }

  GridSpec grid_;
  Array2D<double> coef_;
  Axis ax_e_, ax_h_, ay_e_, ay_h_;
  Array2D<double> psi_ez_x_, psi_ez_y_, psi_hx_y_, psi_hy_x_;
};

}  // namespace twr::em
