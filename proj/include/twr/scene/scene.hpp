#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <tuple>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/rng.hpp"
#include "twr/em/grid.hpp"
#include "twr/em/material.hpp"
#include "twr/em/simulation.hpp"
#include "twr/scene/wall.hpp"

namespace twr::scene {

// Target centre in the labelling frame, centimeters.
struct Position {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position&, const Position&) = default;
};

inline constexpr std::array<double, 3> kTargetSizes{0.10, 0.20, 0.30};
inline constexpr double kTargetEps = 80.0;

struct TargetSpec {
  Position center;      // cm, labelling frame
  double size = 0.10;   // edge length, meters
  double eps_r = kTargetEps;
  friend bool operator==(const TargetSpec&, const TargetSpec&) = default;
};

struct Scene {
  WallSpec wall;
  std::vector<TargetSpec> targets;
  em::Point frame_offset{0.50, -0.15};  // meters added after cm -> m conversion
};

// Axis-aligned rectangle [x0, x1) x [y0, y1) in interior-frame meters.
struct Rect {
  double x0, y0, x1, y1;
  // Squares that share an edge touch but do not overlap; the slack absorbs the
  // rounding of the cm -> m conversion.
  bool overlaps(const Rect& o) const noexcept {
    constexpr double eps = 1e-9;
    return x0 < o.x1 - eps && o.x0 < x1 - eps && y0 < o.y1 - eps && o.y0 < y1 - eps;
  }
};

inline em::Point paper_frame_to_domain(Position center_cm, em::Point frame_offset) {
  return {frame_offset.x + center_cm.x / 100.0, frame_offset.y + center_cm.y / 100.0};
}

inline Rect target_footprint(const TargetSpec& t, em::Point frame_offset) {
  const auto c = paper_frame_to_domain(t.center, frame_offset);
  const double h = t.size / 2.0;
  return {c.x - h, c.y - h, c.x + h, c.y + h};
}

// Domain coordinates of a target centre; throws if its square leaves the interior.
inline em::Point paper_frame_to_domain(Position center_cm, double size, em::Point frame_offset,
                                       const em::GridSpec& grid) {
  const auto r = target_footprint({center_cm, size, kTargetEps}, frame_offset);
  constexpr double tol = 1e-9;
  if (r.x0 < -tol || r.y0 < -tol || r.x1 > grid.width() + tol || r.y1 > grid.height() + tol) {
    throw InvalidScene("target square at (" + std::to_string(center_cm.x) + ", " + std::to_string(center_cm.y) +
                       ") cm leaves the simulation interior");
  }
  return paper_frame_to_domain(center_cm, frame_offset);
}

inline void validate_scene(const Scene& scene, const em::GridSpec& grid) {
  scene.wall.validate();
  if (scene.targets.size() > 2) throw InvalidScene("at most two targets are supported");
  std::vector<Rect> rects;
  for (const auto& t : scene.targets) {
    if (!(t.size > 0.0)) throw InvalidScene("target size must be positive");
    if (t.eps_r < 1.0) throw InvalidScene("target permittivity must be >= 1");
    paper_frame_to_domain(t.center, t.size, scene.frame_offset, grid);
    const auto r = target_footprint(t, scene.frame_offset);
    if (!scene.wall.empty() && r.y0 < scene.wall.band_top && scene.wall.band_bottom() < r.y1) {
      throw InvalidScene("target intersects the wall band");
    }
    rects.push_back(r);
  }
  if (rects.size() == 2 && rects[0].overlaps(rects[1])) throw InvalidScene("targets overlap");
}

// Permittivity sampled at Ez nodes by cell-centre containment. The wall runs
// through the absorbing layer at both ends; targets are painted last.
inline em::MaterialMap build_material_map(const Scene& scene, const em::GridSpec& grid) {
  validate_scene(scene, grid);
  em::MaterialMap m(grid);
  const std::size_t nx = grid.total_x(), ny = grid.total_y();
  if (!scene.wall.empty()) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = grid.node_center_y(j);
      double top = scene.wall.band_top;
      for (const auto& layer : scene.wall.layers) {
        const double bottom = top - layer.thickness;
        if (y >= bottom && y < top) {
          for (std::size_t i = 0; i < nx; ++i) {
            m.eps_xx(i, j) = layer.eps.xx;
            m.eps_yy(i, j) = layer.eps.yy;
            m.eps_zz(i, j) = layer.eps.zz;
          }
          break;
        }
        top = bottom;
      }
    }
  }
  for (const auto& t : scene.targets) {
    const auto r = target_footprint(t, scene.frame_offset);
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = grid.node_center_x(i);
      if (x < r.x0 || x >= r.x1) continue;
      for (std::size_t j = 0; j < ny; ++j) {
        const double y = grid.node_center_y(j);
        if (y < r.y0 || y >= r.y1) continue;
        m.eps_xx(i, j) = m.eps_yy(i, j) = m.eps_zz(i, j) = t.eps_r;
      }
    }
  }
  return m;
}

inline em::ProbeRecord run_simulation(const Scene& scene, const em::GridSpec& grid, const em::SourceSpec& src,
                                      const em::RunSpec& run) {
  return em::run_simulation(build_material_map(scene, grid), grid, src, run);
}

inline std::size_t grid_count(double lo, double hi, double step) {
  if (hi < lo) return 0;
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

// Inclusive grid of centres, rows of increasing x stacked by increasing y.
inline std::vector<Position> enumerate_single_positions(double x_lo, double x_hi, double y_lo, double y_hi,
                                                        double step) {
  if (!(step > 0.0)) throw InvalidArgument("enumerate_single_positions: step must be positive");
  const auto nx = grid_count(x_lo, x_hi, step), ny = grid_count(y_lo, y_hi, step);
  std::vector<Position> out;
  out.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      out.push_back({x_lo + static_cast<double>(i) * step, y_lo + static_cast<double>(j) * step});
    }
  }
  return out;
}

using PositionPair = std::pair<Position, Position>;

inline double chebyshev_cm(Position a, Position b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

// Ascending x, then y.
inline PositionPair canonical(Position a, Position b) { return b < a ? PositionPair{b, a} : PositionPair{a, b}; }

inline std::vector<PositionPair> admissible_pairs(const std::vector<Position>& positions, double min_separation_cm) {
  std::vector<PositionPair> out;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (positions[i] == positions[j]) continue;
      if (chebyshev_cm(positions[i], positions[j]) + 1e-9 < min_separation_cm) continue;
      out.push_back(canonical(positions[i], positions[j]));
    }
  }
  return out;
}

// Seeded uniform sample without replacement of unordered position pairs whose
// Chebyshev separation is at least `min_separation_cm` (30 cm keeps two
// 30 cm squares from overlapping). Returned sorted.
inline std::vector<PositionPair> enumerate_pairs(const std::vector<Position>& positions, std::size_t count,
                                                 std::uint64_t seed, double min_separation_cm = 30.0) {
  auto pool = admissible_pairs(positions, min_separation_cm);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (count > pool.size()) {
    throw CapacityError("enumerate_pairs: requested " + std::to_string(count) + " pairs but only " +
                        std::to_string(pool.size()) + " are admissible");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace twr::scene
