#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "json.hpp"
#include "twr/core/error.hpp"
#include "twr/em/grid.hpp"
#include "twr/em/simulation.hpp"
#include "twr/scene/scene.hpp"
#include "twr/scene/wall.hpp"

namespace twr::scene {

// probe_series: decimated Ez/Hx/Hy time series at one detector cell.
// receiver_line: steady-state echo level along a row of receivers, after
// subtracting the empty-wall run for the same scenario.
enum class FeatureMode { probe_series, receiver_line };

inline std::string_view to_string(FeatureMode m) {
  return m == FeatureMode::receiver_line ? "receiver_line" : "probe_series";
}

inline FeatureMode feature_mode_from_string(std::string_view s) {
  if (s == "probe_series") return FeatureMode::probe_series;
  if (s == "receiver_line") return FeatureMode::receiver_line;
  throw InvalidArgument("unknown feature mode '" + std::string(s) + "'");
}

// Everything that fixes the simulated geometry and the placement grids. The
// defaults form the standard experiment; a scene configuration file overrides
// any subset of them (see README for the schema).
struct SceneLayout {
  double domain_size = 2.0;  // m
  double frequency = 3.0e9;  // Hz
  double courant = 1.0 / std::numbers::sqrt2;
  std::size_t pml_cells = 10;

  double wall_top = 1.20;  // m; the wall occupies [wall_top - thickness, wall_top]
  double homogeneous_eps = 6.0;
  std::map<Scenario, std::vector<WallLayer>> wall_overrides;

  em::SourceSpec source{};
  em::Point detector{0.50, 1.50};
  std::int64_t total_steps = 2375;
  std::int64_t sample_stride = 25;
  em::PmlSpec pml{};

  FeatureMode feature_mode = FeatureMode::probe_series;
  em::LineSpec line{};

  em::Point frame_offset{0.50, -0.15};
  double target_eps = kTargetEps;
  std::vector<double> target_sizes{kTargetSizes.begin(), kTargetSizes.end()};

  double x_lo = 5, x_hi = 85, y_lo = 40, y_hi = 100, position_step = 10;  // cm
  std::size_t pair_count = 756;
  double min_separation = 30;  // cm, Chebyshev

  em::GridSpec grid() const { return em::make_grid(domain_size, frequency, courant, pml_cells); }

  WallSpec wall(Scenario s) const {
    auto w = make_wall(s, wall_top, homogeneous_eps);
    if (auto it = wall_overrides.find(s); it != wall_overrides.end()) w.layers = it->second;
    return w;
  }

  em::RunSpec run_spec() const { return {detector, total_steps, sample_stride, pml}; }

  std::size_t series_length() const { return static_cast<std::size_t>(total_steps / sample_stride); }

  std::size_t feature_dim() const {
    return 3 * (feature_mode == FeatureMode::receiver_line ? line.count : series_length());
  }

  Scene empty_scene(Scenario s) const {
    Scene sc;
    sc.wall = wall(s);
    sc.frame_offset = frame_offset;
    return sc;
  }

  std::vector<Position> single_positions() const {
    return enumerate_single_positions(x_lo, x_hi, y_lo, y_hi, position_step);
  }

  Scene make_scene(Scenario s, const std::vector<Position>& centers, const std::vector<double>& sizes) const {
    if (centers.size() != sizes.size()) throw InvalidArgument("make_scene: one size per target required");
    Scene sc;
    sc.wall = wall(s);
    sc.frame_offset = frame_offset;
    for (std::size_t k = 0; k < centers.size(); ++k) sc.targets.push_back({centers[k], sizes[k], target_eps});
    return sc;
  }
};

inline void to_json(nlohmann::json& j, const EpsDiag& e) { j = nlohmann::json::array({e.xx, e.yy, e.zz}); }
inline void from_json(const nlohmann::json& j, EpsDiag& e) {
  if (j.is_number()) {
    e = EpsDiag::isotropic(j.get<double>());
    return;
  }
  if (!j.is_array() || j.size() != 3) throw InvalidArgument("permittivity must be a number or [xx, yy, zz]");
  e = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
inline void to_json(nlohmann::json& j, const WallLayer& l) { j = {{"thickness_m", l.thickness}, {"eps", l.eps}}; }
inline void from_json(const nlohmann::json& j, WallLayer& l) {
  l.thickness = j.at("thickness_m").get<double>();
  l.eps = j.at("eps").get<EpsDiag>();
}

inline nlohmann::json to_json(const SceneLayout& s) {
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [sc, layers] : s.wall_overrides) overrides[std::string(to_string(sc))] = layers;
  return {
      {"domain_size_m", s.domain_size},
      {"frequency_hz", s.frequency},
      {"courant", s.courant},
      {"pml_cells", s.pml_cells},
      {"pml", {{"grading_order", s.pml.grading_order}, {"sigma_scale", s.pml.sigma_scale}, {"alpha_max", s.pml.alpha_max}}},
      {"wall_top_m", s.wall_top},
      {"homogeneous_eps", s.homogeneous_eps},
      {"wall_overrides", overrides},
      {"source",
       {{"row_y_m", s.source.row_y},
        {"amplitude", s.source.amplitude},
        {"envelope_periods", s.source.envelope_periods},
        {"waveform", s.source.waveform == em::Waveform::gaussian_pulse ? "gaussian_pulse" : "ramped_sine"}}},
      {"detector_m", {s.detector.x, s.detector.y}},
      {"total_steps", s.total_steps},
      {"features",
       {{"mode", std::string(to_string(s.feature_mode))},
        {"line_y_m", s.line.y},
        {"line_x_first_m", s.line.x_first},
        {"line_spacing_m", s.line.spacing},
        {"receivers", s.line.count},
        {"window_steps", s.line.window_steps}}},
      {"sample_stride", s.sample_stride},
      {"frame_offset_m", {s.frame_offset.x, s.frame_offset.y}},
      {"target_eps", s.target_eps},
      {"target_sizes_m", s.target_sizes},
      {"x_range_cm", {s.x_lo, s.x_hi}},
      {"y_range_cm", {s.y_lo, s.y_hi}},
      {"position_step_cm", s.position_step},
      {"pair_count", s.pair_count},
      {"min_separation_cm", s.min_separation},
  };
}

// Reads a layout, starting from the defaults; unknown keys are rejected.
inline SceneLayout layout_from_json(const nlohmann::json& j) {
  SceneLayout s;
  if (!j.is_object()) throw InvalidArgument("scene configuration must be a JSON object");
  const auto pair_of = [](const nlohmann::json& v, double& a, double& b) {
    if (!v.is_array() || v.size() != 2) throw InvalidArgument("expected a two-element array");
    a = v[0].get<double>();
    b = v[1].get<double>();
  };
  for (const auto& [key, v] : j.items()) {
    if (key == "domain_size_m") s.domain_size = v.get<double>();
    else if (key == "frequency_hz") {
      s.frequency = v.get<double>();
      s.source.frequency = s.frequency;
    } else if (key == "courant") s.courant = v.get<double>();
    else if (key == "pml_cells") s.pml_cells = v.get<std::size_t>();
    else if (key == "pml") {
      s.pml.grading_order = v.value("grading_order", s.pml.grading_order);
      s.pml.sigma_scale = v.value("sigma_scale", s.pml.sigma_scale);
      s.pml.alpha_max = v.value("alpha_max", s.pml.alpha_max);
    } else if (key == "wall_top_m") s.wall_top = v.get<double>();
    else if (key == "homogeneous_eps") s.homogeneous_eps = v.get<double>();
    else if (key == "wall_overrides") {
      for (const auto& [name, layers] : v.items()) {
        s.wall_overrides[scenario_from_string(name)] = layers.get<std::vector<WallLayer>>();
      }
    } else if (key == "source") {
      s.source.row_y = v.value("row_y_m", s.source.row_y);
      s.source.amplitude = v.value("amplitude", s.source.amplitude);
      s.source.envelope_periods = v.value("envelope_periods", s.source.envelope_periods);
      if (v.contains("waveform")) {
        const auto w = v.at("waveform").get<std::string>();
        if (w == "gaussian_pulse") s.source.waveform = em::Waveform::gaussian_pulse;
        else if (w == "ramped_sine") s.source.waveform = em::Waveform::ramped_sine;
        else throw InvalidArgument("unknown source waveform '" + w + "'");
      }
    } else if (key == "detector_m") pair_of(v, s.detector.x, s.detector.y);
    else if (key == "total_steps") s.total_steps = v.get<std::int64_t>();
    else if (key == "features") {
      for (const auto& [fk, fv] : v.items()) {
        if (fk == "mode") s.feature_mode = feature_mode_from_string(fv.get<std::string>());
        else if (fk == "line_y_m") s.line.y = fv.get<double>();
        else if (fk == "line_x_first_m") s.line.x_first = fv.get<double>();
        else if (fk == "line_spacing_m") s.line.spacing = fv.get<double>();
        else if (fk == "receivers") s.line.count = fv.get<std::size_t>();
        else if (fk == "window_steps") s.line.window_steps = fv.get<std::int64_t>();
        else throw InvalidArgument("unknown features key '" + fk + "'");
      }
    }
    else if (key == "sample_stride") s.sample_stride = v.get<std::int64_t>();
    else if (key == "frame_offset_m") pair_of(v, s.frame_offset.x, s.frame_offset.y);
    else if (key == "target_eps") s.target_eps = v.get<double>();
    else if (key == "target_sizes_m") s.target_sizes = v.get<std::vector<double>>();
    else if (key == "x_range_cm") pair_of(v, s.x_lo, s.x_hi);
    else if (key == "y_range_cm") pair_of(v, s.y_lo, s.y_hi);
    else if (key == "position_step_cm") s.position_step = v.get<double>();
    else if (key == "pair_count") s.pair_count = v.get<std::size_t>();
    else if (key == "min_separation_cm") s.min_separation = v.get<double>();
    else throw InvalidArgument("unknown scene configuration key '" + key + "'");
  }
  if (s.target_sizes.empty()) throw InvalidArgument("target_sizes_m must not be empty");
  return s;
}

}  // namespace twr::scene
