#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twr/core/error.hpp"

namespace twr::scene {

enum class Scenario : std::uint8_t {
  homogeneous = 0,
  airgap = 1,
  inhomogeneous = 2,
  anisotropic = 3,
  inhomogeneous_anisotropic = 4,
};

inline constexpr std::array kAllScenarios{Scenario::homogeneous, Scenario::airgap, Scenario::inhomogeneous,
                                          Scenario::anisotropic, Scenario::inhomogeneous_anisotropic};

inline std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::homogeneous: return "homogeneous";
    case Scenario::airgap: return "airgap";
    case Scenario::inhomogeneous: return "inhomogeneous";
    case Scenario::anisotropic: return "anisotropic";
    case Scenario::inhomogeneous_anisotropic: return "inhomogeneous_anisotropic";
  }
  return "unknown";
}

inline Scenario scenario_from_string(std::string_view name) {
  for (auto s : kAllScenarios) {
    if (to_string(s) == name) return s;
  }
  if (name == "inhomogeneous-anisotropic") return Scenario::inhomogeneous_anisotropic;
  throw InvalidArgument("unknown wall scenario '" + std::string(name) + "'");
}

// Diagonal of the relative permittivity tensor.
struct EpsDiag {
  double xx = 1.0;
  double yy = 1.0;
  double zz = 1.0;

  static constexpr EpsDiag isotropic(double e) { return {e, e, e}; }
  friend bool operator==(const EpsDiag&, const EpsDiag&) = default;
};

struct WallLayer {
  double thickness = 0.0;  // meters
  EpsDiag eps;
  friend bool operator==(const WallLayer&, const WallLayer&) = default;
};

// A wall spanning the full domain width. Layers are listed from the
// source-facing surface (top, y = band_top) downwards.
struct WallSpec {
  Scenario scenario = Scenario::homogeneous;
  std::vector<WallLayer> layers;
  double band_top = 1.20;  // meters, interior frame

  double thickness() const noexcept {
    double t = 0.0;
    for (const auto& l : layers) t += l.thickness;
    return t;
  }
  double band_bottom() const noexcept { return band_top - thickness(); }
  bool empty() const noexcept { return layers.empty(); }

  void validate() const {
    for (const auto& l : layers) {
      if (!(l.thickness > 0.0)) throw InvalidScene("wall layer thickness must be positive");
      if (l.eps.xx < 1.0 || l.eps.yy < 1.0 || l.eps.zz < 1.0) {
        throw InvalidScene("wall layer permittivity components must be >= 1");
      }
    }
  }

  friend bool operator==(const WallSpec&, const WallSpec&) = default;
};

inline constexpr std::array<double, 10> kInhomogeneousEps{3, 6, 4, 5, 6, 3, 6, 3, 5, 2};

inline constexpr std::array<EpsDiag, 10> kInhomogeneousAnisotropicEps{{
    {6, 3, 2}, {5, 5, 2}, {6, 4, 2}, {4, 6, 2}, {3, 4, 2},
    {2, 3, 2}, {5, 2, 2}, {2, 4, 2}, {4, 3, 2}, {3, 5, 2},
}};

inline constexpr EpsDiag kAnisotropicEps{6, 4, 2};

// Standard wall for a scenario: 10 cm thick, except the air-gap wall
// (5 cm slab, 5 cm air, 5 cm slab). Slabs use `homogeneous_eps`.
inline WallSpec make_wall(Scenario s, double band_top = 1.20, double homogeneous_eps = 6.0) {
  WallSpec w;
  w.scenario = s;
  w.band_top = band_top;
  switch (s) {
    case Scenario::homogeneous:
      w.layers = {{0.10, EpsDiag::isotropic(homogeneous_eps)}};
      break;
    case Scenario::airgap:
      w.layers = {{0.05, EpsDiag::isotropic(homogeneous_eps)},
                  {0.05, EpsDiag::isotropic(1.0)},
                  {0.05, EpsDiag::isotropic(homogeneous_eps)}};
      break;
    case Scenario::inhomogeneous:
      for (double e : kInhomogeneousEps) w.layers.push_back({0.01, EpsDiag::isotropic(e)});
      break;
    case Scenario::anisotropic:
      w.layers = {{0.10, kAnisotropicEps}};
      break;
    case Scenario::inhomogeneous_anisotropic:
      for (const auto& e : kInhomogeneousAnisotropicEps) w.layers.push_back({0.01, e});
      break;
  }
  return w;
}

}  // namespace twr::scene
