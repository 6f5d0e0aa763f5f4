#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "twr/core/error.hpp"
#include "twr/core/hash.hpp"
#include "twr/core/rng.hpp"
#include "twr/dataset/dataset.hpp"
#include "twr/scene/layout.hpp"
#include "twr/scene/scene.hpp"

namespace twr::dataset {

struct GenConfig {
  scene::SceneLayout layout;
  std::vector<scene::Scenario> scenarios{scene::kAllScenarios.begin(), scene::kAllScenarios.end()};
  int n_targets = 1;
  std::uint64_t seed = 1;
  unsigned jobs = 0;  // 0 = hardware concurrency; never affects the output
};

// One simulation to run.
struct Placement {
  scene::Scenario scenario;
  std::vector<scene::Position> centers;
  std::vector<double> sizes;
  std::uint64_t sim_seed;
  std::size_t index_in_scenario;

  std::string describe() const {
    std::string s = std::string(scene::to_string(scenario)) + " #" + std::to_string(index_in_scenario) + " [";
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (k) s += "; ";
      s += "(" + format_num(centers[k].x) + ", " + format_num(centers[k].y) + ") cm, " + format_num(sizes[k]) + " m";
    }
    return s + "]";
  }

 private:
  static std::string format_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
  }
};

class GenerationError : public std::runtime_error {
 public:
  GenerationError(const std::string& placement, const std::string& cause)
      : std::runtime_error("generation failed at " + placement + ": " + cause), placement_(placement) {}
  const std::string& placement() const noexcept { return placement_; }

 private:
  std::string placement_;
};

inline constexpr std::uint64_t kPairStream = 0x7061697273ULL;  // "pairs"

inline nlohmann::json gen_config_json(const GenConfig& c) {
  nlohmann::json sc = nlohmann::json::array();
  for (auto s : c.scenarios) sc.push_back(std::string(scene::to_string(s)));
  return {{"layout", scene::to_json(c.layout)}, {"scenarios", sc}, {"targets", c.n_targets}, {"seed", c.seed}};
}

inline std::uint64_t grid_hash(const em::GridSpec& g) {
  const nlohmann::json j = {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy},
                            {"dt", g.dt}, {"courant", g.courant}, {"pml_cells", g.pml_cells}};
  return hash64(j.dump());
}

// Deterministic list of placements. Two-target pairs are drawn once from the
// master seed and reused for every scenario; sizes come from each sample's
// own seed, derived from (master seed, scenario, placement index).
inline std::vector<Placement> plan_placements(const GenConfig& c) {
  if (c.n_targets != 1 && c.n_targets != 2) throw InvalidArgument("target count must be 1 or 2");
  if (c.scenarios.empty()) throw InvalidArgument("no scenarios requested");
  const auto positions = c.layout.single_positions();
  std::vector<std::vector<scene::Position>> sets;
  if (c.n_targets == 1) {
    for (const auto& p : positions) sets.push_back({p});
  } else {
    for (const auto& [a, b] : scene::enumerate_pairs(positions, c.layout.pair_count, derive_seed(c.seed, kPairStream),
                                                     c.layout.min_separation)) {
      sets.push_back({a, b});
    }
  }
  std::vector<Placement> plan;
  plan.reserve(sets.size() * c.scenarios.size());
  for (auto s : c.scenarios) {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      Placement p{s, sets[k], {}, derive_seed(c.seed, static_cast<std::uint64_t>(s) + 1, k), k};
      Rng rng(p.sim_seed);
      for (std::size_t t = 0; t < sets[k].size(); ++t) {
        p.sizes.push_back(c.layout.target_sizes[rng.below(c.layout.target_sizes.size())]);
      }
      plan.push_back(std::move(p));
    }
  }
  return plan;
}

// Empty-wall recording used as the background in receiver_line mode.
inline em::LineRecord simulate_background(const scene::SceneLayout& layout, const em::GridSpec& grid,
                                          scene::Scenario s) {
  const auto m = scene::build_material_map(layout.empty_scene(s), grid);
  return em::run_line_simulation(m, grid, layout.source, layout.line, layout.total_steps, layout.pml);
}

inline FeatureVector simulate_features(const scene::SceneLayout& layout, const em::GridSpec& grid,
                                       const scene::Scene& sc, const em::LineRecord* background) {
  if (layout.feature_mode == scene::FeatureMode::probe_series) {
    const auto rec = scene::run_simulation(sc, grid, layout.source, layout.run_spec());
    return extract_features(impedance_scaled(rec), layout.series_length());
  }
  if (background == nullptr) throw InvalidArgument("receiver_line features need a background recording");
  const auto m = scene::build_material_map(sc, grid);
  return line_features(em::run_line_simulation(m, grid, layout.source, layout.line, layout.total_steps, layout.pml),
                       *background);
}

inline Sample simulate_placement(const scene::SceneLayout& layout, const em::GridSpec& grid, const Placement& p,
                                 const em::LineRecord* background = nullptr) {
  Sample s;
  s.features = simulate_features(layout, grid, layout.make_scene(p.scenario, p.centers, p.sizes), background);
  for (const auto& c : p.centers) {
    s.labels.push_back(c.x);
    s.labels.push_back(c.y);
  }
  s.scenario = p.scenario;
  s.sizes = p.sizes;
  s.sim_seed = p.sim_seed;
  return s;
}

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs every placement (in parallel when jobs > 1) and assembles the samples
// in plan order, so the result is independent of scheduling.
inline Dataset generate_dataset(const GenConfig& c, const ProgressFn& progress = {}) {
  const auto plan = plan_placements(c);
  const auto grid = c.layout.grid();
  // Validate every scene up front so bad geometry fails before any simulation.
  for (const auto& p : plan) {
    try {
      scene::validate_scene(c.layout.make_scene(p.scenario, p.centers, p.sizes), grid);
    } catch (const std::exception& e) {
      throw GenerationError(p.describe(), e.what());
    }
  }
  std::map<scene::Scenario, em::LineRecord> backgrounds;
  if (c.layout.feature_mode == scene::FeatureMode::receiver_line) {
    for (auto s : c.scenarios) {
      try {
        backgrounds.emplace(s, simulate_background(c.layout, grid, s));
      } catch (const std::exception& e) {
        throw GenerationError(std::string(scene::to_string(s)) + " background", e.what());
      }
    }
  }
  const auto background_for = [&](scene::Scenario s) -> const em::LineRecord* {
    auto it = backgrounds.find(s);
    return it == backgrounds.end() ? nullptr : &it->second;
  };
  std::vector<Sample> samples(plan.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::mutex err_mu, progress_mu;
  std::size_t err_index = plan.size();
  std::string err_msg;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= plan.size()) return;
      {
        std::lock_guard lk(err_mu);
        if (err_index < plan.size()) return;
      }
      try {
        samples[k] = simulate_placement(c.layout, grid, plan[k], background_for(plan[k].scenario));
      } catch (const std::exception& e) {
        std::lock_guard lk(err_mu);
        if (k < err_index) {
          err_index = k;
          err_msg = e.what();
        }
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lk(progress_mu);
        progress(d, plan.size());
      }
    }
  };
  unsigned jobs = c.jobs ? c.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, plan.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  if (err_index < plan.size()) throw GenerationError(plan[err_index].describe(), err_msg);

  Dataset ds;
  ds.samples = std::move(samples);
  ds.meta.config_json = gen_config_json(c).dump();
  ds.meta.config_hash = hash64(ds.meta.config_json);
  ds.meta.grid_hash = grid_hash(grid);
  ds.meta.master_seed = c.seed;
  return ds;
}

}  // namespace twr::dataset
