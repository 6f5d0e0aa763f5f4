#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/em/solver.hpp"

namespace twr::em {

// Detector time series, decimated to one sample every `sample_stride` steps.
struct ProbeRecord {
  std::vector<double> ez_series;
  std::vector<double> hx_series;
  std::vector<double> hy_series;
  std::size_t sample_stride = 1;

  std::size_t length() const noexcept { return ez_series.size(); }
  friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

struct RunSpec {
  Point detector{0.50, 1.50};
  std::int64_t total_steps = 2375;
  std::int64_t sample_stride = 25;
  PmlSpec pml{};
};

// H is sampled on the staggered faces adjacent to the detector node:
// hx at (i, j + 1/2) and hy at (i + 1/2, j).
inline ProbeRecord run_simulation(const MaterialMap& materials, const GridSpec& grid, const SourceSpec& src,
                                  const RunSpec& run) {
  if (run.sample_stride < 1 || run.total_steps < run.sample_stride) {
    throw InvalidArgument("run_simulation: need total_steps >= sample_stride >= 1");
  }
  const long cx = grid.cell_x(run.detector.x), cy = grid.cell_y(run.detector.y);
  if (!grid.interior_x(cx) || !grid.interior_y(cy)) {
    throw InvalidArgument("run_simulation: detector lies outside the interior");
  }
  source_row_node(src, grid);  // validates the source row
  const std::size_t di = grid.node_x(cx), dj = grid.node_y(cy);

  FieldState state(grid);
  Solver solver(grid, materials, run.pml);
  ProbeRecord rec;
  rec.sample_stride = static_cast<std::size_t>(run.sample_stride);
  const auto n = static_cast<std::size_t>(run.total_steps / run.sample_stride);
  rec.ez_series.reserve(n);
  rec.hx_series.reserve(n);
  rec.hy_series.reserve(n);

  for (std::int64_t q = 1; q <= run.total_steps; ++q) {
    apply_source(state, src, grid);
    solver.step(state);
    if (q % run.sample_stride == 0) {
      if (!state.all_finite()) throw SimulationDiverged(q, "run_simulation: non-finite field");
      rec.ez_series.push_back(state.ez(di, dj));
      rec.hx_series.push_back(state.hx(di, dj));
      rec.hy_series.push_back(state.hy(di, dj));
    }
  }
  if (!state.all_finite()) throw SimulationDiverged(run.total_steps, "run_simulation: non-finite field");
  return rec;
}

// A row of receivers parallel to the source line. Every receiver keeps the
// full-rate fields over the last `window_steps` steps of the run.
struct LineSpec {
  double y = 1.50;         // m
  double x_first = 0.05;   // m
  double spacing = 0.02;   // m
  std::size_t count = 95;
  std::int64_t window_steps = 600;
  friend bool operator==(const LineSpec&, const LineSpec&) = default;
};

// Fields indexed [t * count + receiver] for t in the recording window.
struct LineRecord {
  std::size_t count = 0;
  std::size_t window = 0;
  std::vector<double> ez, hx, hy;
  friend bool operator==(const LineRecord&, const LineRecord&) = default;
};

inline LineRecord run_line_simulation(const MaterialMap& materials, const GridSpec& grid, const SourceSpec& src,
                                      const LineSpec& line, std::int64_t total_steps, const PmlSpec& pml = {}) {
  if (line.count == 0 || line.window_steps < 1 || total_steps < line.window_steps) {
    throw InvalidArgument("run_line_simulation: need receivers and total_steps >= window_steps >= 1");
  }
  const long cy = grid.cell_y(line.y);
  if (!grid.interior_y(cy)) throw InvalidArgument("run_line_simulation: receiver line outside the interior");
  std::vector<std::size_t> xs;
  for (std::size_t k = 0; k < line.count; ++k) {
    const long cx = grid.cell_x(line.x_first + static_cast<double>(k) * line.spacing);
    if (!grid.interior_x(cx)) throw InvalidArgument("run_line_simulation: receiver outside the interior");
    xs.push_back(grid.node_x(cx));
  }
  source_row_node(src, grid);
  const std::size_t dj = grid.node_y(cy);

  FieldState state(grid);
  Solver solver(grid, materials, pml);
  LineRecord rec;
  rec.count = line.count;
  rec.window = static_cast<std::size_t>(line.window_steps);
  rec.ez.reserve(rec.count * rec.window);
  rec.hx.reserve(rec.count * rec.window);
  rec.hy.reserve(rec.count * rec.window);
  const std::int64_t first = total_steps - line.window_steps + 1;
  for (std::int64_t q = 1; q <= total_steps; ++q) {
    apply_source(state, src, grid);
    solver.step(state);
    if (q < first) continue;
    for (std::size_t i : xs) {
      rec.ez.push_back(state.ez(i, dj));
      rec.hx.push_back(state.hx(i, dj));
      rec.hy.push_back(state.hy(i, dj));
    }
  }
  if (!state.all_finite()) throw SimulationDiverged(total_steps, "run_line_simulation: non-finite field");
  return rec;
}

}  // namespace twr::em
