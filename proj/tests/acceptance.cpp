// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on stderr.
// Exit status is nonzero when any selected criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twr/app/commands.hpp"
#include "twr/em/simulation.hpp"
#include "twr/nn/adam.hpp"

using namespace twr;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Datasets shared between criteria, generated on first use.
class Workspace {
 public:
  explicit Workspace(fs::path root) : root_(std::move(root)) {}

  const fs::path& root() const { return root_; }
  fs::path dir(const std::string& name) const { return root_ / name; }

  // Full single-target all-data set with the receiver-line features the
  // localization criteria are evaluated on.
  const fs::path& line_dataset() {
    if (line_.empty()) {
      dataset::GenConfig c;
      c.layout.feature_mode = scene::FeatureMode::receiver_line;
      std::cerr << "generating the receiver-line dataset (315 simulations + 5 backgrounds)\n";
      const auto t0 = Clock::now();
      const auto r = app::cmd_gen(c, dir("line-gen"), false, 0, std::cerr);
      std::cerr << "  done in " << num(seconds_since(t0)) << " s\n";
      line_ = r.run_dir / "dataset.twrd";
    }
    return line_;
  }

 private:
  fs::path root_;
  fs::path line_;
};

// ---------------------------------------------------------------- 1

Outcome parameter_counts() {
  const auto two = nn::build_two_target_model();
  const auto per = two.dense_parameter_counts();
  const std::vector<std::size_t> want{81510, 85800, 90300, 90300, 90300, 90300, 1204};
  std::string layers;
  for (auto c : per) layers += (layers.empty() ? "" : "/") + std::to_string(c);
  const bool ok = two.parameter_count() == 529714 && per == want;
  return {ok, "two-target total " + std::to_string(two.parameter_count()) + ", per layer " + layers};
}

// ---------------------------------------------------------------- 2

Outcome dataset_protocol(Workspace& ws) {
  std::vector<std::string> problems;
  dataset::GenConfig c;
  const auto count = [&](int targets, std::vector<scene::Scenario> sc) {
    auto k = c;
    k.n_targets = targets;
    k.scenarios = std::move(sc);
    return dataset::plan_placements(k).size();
  };
  const std::vector<scene::Scenario> all(scene::kAllScenarios.begin(), scene::kAllScenarios.end());
  std::size_t single_min = 1000000, single_max = 0, pair_min = 1000000, pair_max = 0;
  for (auto s : scene::kAllScenarios) {
    const auto n1 = count(1, {s}), n2 = count(2, {s});
    single_min = std::min(single_min, n1), single_max = std::max(single_max, n1);
    pair_min = std::min(pair_min, n2), pair_max = std::max(pair_max, n2);
  }
  const auto all1 = count(1, all), all2 = count(2, all);
  if (single_min != 63 || single_max != 63) problems.push_back("single-target per scenario != 63");
  if (pair_min != 756 || pair_max != 756) problems.push_back("two-target per scenario != 756");
  if (all1 != 315) problems.push_back("single-target all-data != 315");
  if (all2 != 3780) problems.push_back("two-target all-data != 3780");

  // One simulation, timed on its own.
  const auto grid = c.layout.grid();
  const auto plan = dataset::plan_placements(c);
  auto t0 = Clock::now();
  dataset::simulate_placement(c.layout, grid, plan.front(), nullptr);
  const double one_sim = seconds_since(t0);
  if (one_sim > 5.0) problems.push_back("one simulation took " + num(one_sim) + " s");

  std::cerr << "generating the default single-target all-data set (315 simulations)\n";
  t0 = Clock::now();
  const auto gen = app::cmd_gen(c, ws.dir("gen-all"), false, 1, std::cerr);
  const double full = seconds_since(t0);
  if (full > 1800.0) problems.push_back("full generation took " + num(full) + " s");
  const auto ds = dataset::load_dataset(gen.run_dir / "dataset.twrd");
  if (ds.size() != 315) problems.push_back("generated " + std::to_string(ds.size()) + " samples");

  // Labels enumerate the 9 x 7 grid exactly, once per scenario.
  const auto grid_positions = scene::enumerate_single_positions(5, 85, 40, 100, 10);
  const std::set<scene::Position> want(grid_positions.begin(), grid_positions.end());
  std::map<scene::Scenario, std::multiset<scene::Position>> seen;
  for (const auto& s : ds.samples) seen[s.scenario].insert({s.labels[0], s.labels[1]});
  bool grid_ok = want.size() == 63 && seen.size() == 5;
  for (const auto& [sc, labels] : seen) {
    grid_ok = grid_ok && labels.size() == 63 && std::set<scene::Position>(labels.begin(), labels.end()) == want;
  }
  if (!grid_ok) problems.push_back("labels do not enumerate the 9x7 grid");

  std::string detail = "63/scenario, 315 all-data, 756/scenario, 3780 all-data planned; 315 generated with exact "
                       "9x7 labels; one sim " +
                       num(one_sim, 3) + " s, full set " + num(full, 4) + " s";
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// ---------------------------------------------------------------- 3

em::GridSpec paper_grid() { return em::make_grid(2.0, 3e9, 1.0 / std::numbers::sqrt2, 10); }

std::vector<double> upward_crossings(const std::vector<double>& s, std::size_t from) {
  std::vector<double> out;
  for (std::size_t k = std::max<std::size_t>(from, 1); k < s.size(); ++k) {
    if (s[k - 1] < 0.0 && s[k] >= 0.0) out.push_back(static_cast<double>(k - 1) + s[k - 1] / (s[k - 1] - s[k]));
  }
  return out;
}

// Worst |v/c - 1| over matched zero crossings of the line-source plane wave at
// two probes 30 cm apart.
double phase_velocity_error() {
  const auto g = paper_grid();
  const em::MaterialMap m(g);
  em::FieldState s(g);
  em::Solver solver(g, m);
  const em::SourceSpec src;
  const std::size_t i = g.node_x(g.cell_x(1.0));
  const std::size_t ja = g.node_y(g.cell_y(1.30)), jb = g.node_y(g.cell_y(1.00));
  std::vector<double> a, b;
  for (int q = 1; q <= 1400; ++q) {
    em::apply_source(s, src, g);
    solver.step(s);
    a.push_back(s.ez(i, ja));
    b.push_back(s.ez(i, jb));
  }
  const double distance = static_cast<double>(ja - jb) * g.dy;
  const double lag = distance / em::kSpeedOfLight / g.dt;
  const auto ca = upward_crossings(a, 600), cb = upward_crossings(b, 600);
  double worst = 0.0;
  int matched = 0;
  for (std::size_t k = 0; k + 1 < ca.size(); ++k) {
    const double expect = ca[k] + lag;
    const auto it = std::min_element(cb.begin(), cb.end(), [&](double x, double y) {
      return std::abs(x - expect) < std::abs(y - expect);
    });
    if (it == cb.end() || std::abs(*it - expect) > 3.0) continue;
    worst = std::max(worst, std::abs(distance / ((*it - ca[k]) * g.dt) / em::kSpeedOfLight - 1.0));
    ++matched;
  }
  return matched >= 5 ? worst : INFINITY;
}

double mirror_residual() {
  const auto g = paper_grid();
  scene::Scene sc;
  sc.wall = scene::make_wall(scene::Scenario::inhomogeneous_anisotropic);
  sc.targets = {{{50.0, 60.0}, 0.20, 80.0}};
  const auto m = scene::build_material_map(sc, g);
  em::FieldState s(g);
  em::Solver solver(g, m);
  const em::SourceSpec src;
  for (int q = 0; q < 1200; ++q) {
    em::apply_source(s, src, g);
    solver.step(s);
  }
  const std::size_t n = g.total_x();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < g.total_y(); ++j) {
      asym = std::max(asym, std::abs(s.ez(i, j) - s.ez(n - 1 - i, j)));
      if (j + 1 < g.total_y()) asym = std::max(asym, em::kEta0 * std::abs(s.hx(i, j) - s.hx(n - 1 - i, j)));
      if (i + 1 < n) asym = std::max(asym, em::kEta0 * std::abs(s.hy(i, j) + s.hy(n - 2 - i, j)));
    }
  }
  return asym / std::max(s.max_abs_e(), em::kEta0 * s.max_abs_h());
}

// Worst reflection (dB) at four probes near the absorbing layer of a 1 m
// domain, against a 5 m reference whose boundary echo stays out of the window.
double pml_reflection_db() {
  struct Probe {
    long di, dj;
  };
  const std::vector<Probe> probes{{40, 0}, {0, 45}, {40, 40}, {-20, -45}};
  const int steps = 600;
  const auto run = [&](std::size_t cells) {
    const auto g = em::make_grid(0.01 * static_cast<double>(cells), 3e9);
    em::FieldState s(g);
    em::Solver solver(g, em::MaterialMap(g));
    const std::size_t c = g.total_x() / 2;
    const double f = 3e9, t0 = 1.5 / f;
    std::vector<std::vector<double>> out(probes.size());
    for (int q = 0; q < steps; ++q) {
      const double a = std::numbers::pi * f * (q * g.dt - t0);
      s.ez(c, c) += (1.0 - 2.0 * a * a) * std::exp(-a * a);
      solver.step(s);
      for (std::size_t p = 0; p < probes.size(); ++p) out[p].push_back(s.ez(c + probes[p].di, c + probes[p].dj));
    }
    return out;
  };
  const auto small = run(100), big = run(500);
  double worst = -INFINITY;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double num = 0.0, den = 0.0;
    for (int q = 0; q < steps; ++q) {
      num += (small[p][q] - big[p][q]) * (small[p][q] - big[p][q]);
      den += big[p][q] * big[p][q];
    }
    worst = std::max(worst, 10.0 * std::log10(num / den));
  }
  return worst;
}

// Largest growth of the field energy over any 500-step span once the pulse has
// been emitted, relative to the earlier value.
double energy_growth() {
  const auto g = paper_grid();
  const em::MaterialMap m(g);
  em::SourceSpec src{.row_y = 1.0, .envelope_periods = 1.0, .waveform = em::Waveform::gaussian_pulse};
  em::FieldState s(g);
  em::Solver solver(g, m);
  for (int q = 0; q < 200; ++q) {
    em::apply_source(s, src, g);
    solver.step(s);
  }
  std::vector<double> e;
  for (int q = 0; q <= 1500; ++q) {
    if (q % 50 == 0) e.push_back(em::total_field_energy(s, m, g));
    solver.step(s);
  }
  double worst = -INFINITY;
  for (std::size_t k = 10; k < e.size(); ++k) worst = std::max(worst, e[k] / e[k - 10] - 1.0);
  return worst;
}

bool eps_invariance() {
  const auto g = em::make_grid(0.5, 3e9);
  em::MaterialMap a(g), b(g);
  for (std::size_t i = 0; i < g.total_x(); ++i) {
    for (std::size_t j = 0; j < g.total_y(); ++j) {
      const double zz = 1.0 + static_cast<double>((i * 7 + j * 3) % 5);
      a.eps_zz(i, j) = b.eps_zz(i, j) = zz;
      b.eps_xx(i, j) = 1.0 + static_cast<double>((i + 2 * j) % 9);
      b.eps_yy(i, j) = 1.0 + static_cast<double>((3 * i + j) % 4);
    }
  }
  em::SourceSpec src;
  src.row_y = 0.40;
  em::FieldState sa(g), sb(g);
  em::Solver pa(g, a), pb(g, b);
  for (int q = 0; q < 400; ++q) {
    em::apply_source(sa, src, g);
    em::apply_source(sb, src, g);
    pa.step(sa);
    pb.step(sb);
  }
  return sa.max_abs_e() > 0.0 && sa == sb;
}

Outcome fdtd_physics() {
  const double v = phase_velocity_error();
  const double mirror = mirror_residual();
  const double pml = pml_reflection_db();
  const double growth = energy_growth();
  const bool inv = eps_invariance();
  const bool ok = v <= 0.02 && mirror <= 1e-9 && pml <= -40.0 && growth <= 0.01 && inv;
  return {ok, "phase velocity error " + pct(v) + ", mirror residual " + num(mirror, 3) + ", PML reflection " +
                  num(pml, 4) + " dB, energy growth after source " + pct(std::max(growth, 0.0)) +
                  ", eps_xx/eps_yy invariance " + (inv ? "bit-exact" : "BROKEN")};
}

// ---------------------------------------------------------------- 4

double worst_gradient_error() {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    nn::ModelSpec s{1 + rng.below(8), {}};
    const std::size_t depth = 1 + rng.below(3);
    for (std::size_t k = 0; k + 1 < depth; ++k) {
      s.layers.emplace_back(nn::Dense{1 + rng.below(8), nn::Activation::relu});
      if (rng.uniform() < 0.5) s.layers.emplace_back(nn::Dropout{0.3});
    }
    s.layers.emplace_back(nn::Dense{1 + rng.below(4), nn::Activation::linear});
    auto p = nn::init_params(s, 100 + static_cast<std::uint64_t>(trial));
    for (auto& d : p.dense) {
      for (double& b : d.b) b = rng.uniform() - 0.5;
    }
    for (double& b : p.dense.back().b) b += 2.0;
    const std::size_t batch = 1 + rng.below(4);
    nn::Matrix x(batch, s.input_dim), y(batch, s.output_dim());
    for (double& v : x.data) v = 2.0 * rng.uniform() - 1.0;
    for (double& v : y.data) v = 5.0 * rng.uniform();
    const std::uint64_t seed = 50 + static_cast<std::uint64_t>(trial);
    nn::ForwardCache cache;
    nn::forward(s, p, x, true, seed, &cache);
    const auto g = nn::backward(s, p, cache, y);
    const auto check = [&](double& param, double analytic) {
      constexpr double h = 1e-5;
      const double keep = param;
      param = keep + h;
      const double up = nn::msle(y, nn::forward(s, p, x, true, seed));
      param = keep - h;
      const double down = nn::msle(y, nn::forward(s, p, x, true, seed));
      param = keep;
      const double numeric = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3}));
    };
    for (std::size_t l = 0; l < p.dense.size(); ++l) {
      for (std::size_t k = 0; k < p.dense[l].w.data.size(); ++k) check(p.dense[l].w.data[k], g.dense[l].w.data[k]);
      for (std::size_t k = 0; k < p.dense[l].b.size(); ++k) check(p.dense[l].b[k], g.dense[l].b[k]);
    }
  }
  return worst;
}

Outcome gradient_and_optimizer() {
  const double grad = worst_gradient_error();

  const nn::ModelSpec scalar{1, {nn::Dense{1, nn::Activation::linear}}};
  auto p = nn::zero_params(scalar);
  auto st = nn::make_adam_state(p);
  auto g = nn::zero_gradients(p);
  g.dense[0].w.data[0] = 3.0;
  const double lr = 1e-3;
  nn::adam_step(p, g, st, lr);
  const double first = std::abs(std::abs(p.dense[0].w.data[0]) / lr - 1.0);

  p = nn::zero_params(scalar);
  st = nn::make_adam_state(p);
  for (int k = 0; k < 200; ++k) {
    auto gb = nn::zero_gradients(p);
    gb.dense[0].w.data[0] = 2.0 * (p.dense[0].w.data[0] - 5.0);
    nn::adam_step(p, gb, st, 0.1);
  }
  const double bowl = std::abs(p.dense[0].w.data[0] - 5.0);
  const bool ok = grad <= 1e-4 && first <= 1e-3 && bowl < 0.5;
  return {ok, "max relative gradient error " + num(grad, 3) + " over 20 random models, Adam first step |dw|/lr - 1 = " +
                  num(first, 3) + ", |w - 5| after 200 bowl steps " + num(bowl, 3)};
}

// ---------------------------------------------------------------- 5

Outcome training_reproduction(Workspace& ws) {
  const auto data = ws.line_dataset();
  bool any = false;
  std::string detail = "all-data single-target, lr 1e-4, batch 30, 5000 epochs:";
  for (std::uint64_t seed : {1, 2, 3}) {
    app::TrainOptions o;
    o.seed = seed;
    std::cerr << "training seed " << seed << "\n";
    const auto t0 = Clock::now();
    const auto r = app::cmd_train(data, o, 1, ws.dir("train"), std::cerr);
    const double secs = seconds_since(t0);
    const bool ok = r.train.loss <= 0.02 && r.val.acc >= 0.85 && secs <= 1200.0;
    any = any || ok;
    // Best validation hit-accuracy seen along the way, for the record.
    double best = 0.0;
    for (const auto& e : r.result.history) best = std::max(best, e.val_acc);
    detail += " seed " + std::to_string(seed) + " train MSLE " + num(r.train.loss, 3) + " val hit " + pct(r.val.acc) +
              " (best epoch " + pct(best) + ") " + num(secs, 3) + " s;";
  }
  detail.pop_back();
  return {any, detail};
}

// ---------------------------------------------------------------- 6

Outcome noise_trend(Workspace& ws) {
  const auto data = ws.line_dataset();
  const std::vector<double> snrs{0, 5, 10, 15, 20, 25, 30};
  std::cerr << "noise sweep: " << snrs.size() << " SNR levels + clean reference, 3 seeds\n";
  const auto r = app::cmd_noise_sweep(data, snrs, {1, 2, 3}, app::TrainOptions{}, true, ws.dir("sweep"), std::cerr);
  const double at0 = r.rows.front().mean(), at30 = r.rows.back().mean();
  double best_noisy = 0.0;
  std::string curve;
  for (const auto& row : r.rows) {
    best_noisy = std::max(best_noisy, row.mean());
    curve += (curve.empty() ? "" : " ") + num(row.snr_db) + ":" + pct(row.mean());
  }
  const double clean = r.clean->mean();
  const bool ok = at30 - at0 >= 0.10 && clean >= best_noisy - 0.03;
  return {ok, "mean val hit by SNR dB [" + curve + "], clean " + pct(clean) + "; 30 dB - 0 dB = " +
                  num(100 * (at30 - at0), 3) + " points, clean - best noisy = " + num(100 * (clean - best_noisy), 3) +
                  " points"};
}

// ---------------------------------------------------------------- 7

Outcome determinism(Workspace& ws) {
  std::vector<std::string> problems;
  dataset::GenConfig c;
  c.scenarios = {scene::Scenario::inhomogeneous_anisotropic};
  c.seed = 17;
  std::cerr << "determinism: generating one scenario twice (1 and all worker threads)\n";
  const auto g1 = app::cmd_gen(c, ws.dir("det"), false, 1, std::cerr);
  const auto g2 = app::cmd_gen(c, ws.dir("det"), false, 0, std::cerr);
  const auto data = g1.run_dir / "dataset.twrd";
  if (slurp(data) != slurp(g2.run_dir / "dataset.twrd")) problems.push_back("dataset files differ");

  app::TrainOptions o;
  o.seed = 5;
  o.epochs = 200;
  const auto t1 = app::cmd_train(data, o, 1, ws.dir("det"), std::cerr);
  const auto t2 = app::cmd_train(data, o, 1, ws.dir("det"), std::cerr);
  if (slurp(t1.run_dir / "history.csv") != slurp(t2.run_dir / "history.csv")) problems.push_back("histories differ");
  if (slurp(t1.run_dir / "model.twrm") != slurp(t2.run_dir / "model.twrm")) problems.push_back("checkpoints differ");

  const auto e1 = app::cmd_eval(t1.run_dir / "model.twrm", data, "val", std::nullopt, ws.dir("det"), std::cerr);
  const auto e2 = app::cmd_eval(t2.run_dir / "model.twrm", data, "val", std::nullopt, ws.dir("det"), std::cerr);
  if (slurp(e1.run_dir / "metrics.json") != slurp(e2.run_dir / "metrics.json")) problems.push_back("metrics differ");

  std::string detail = "gen (1 vs all threads), train (200 epochs) and eval reruns: ";
  if (problems.empty()) return {true, detail + "dataset, history, checkpoint and metrics byte-identical"};
  for (const auto& p : problems) detail += p + "; ";
  return {false, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Acceptance criteria"};
  std::string work = "acceptance_runs";
  std::vector<int> only;
  cli.add_option("--work-dir", work, "Scratch directory for generated data and runs (recreated)");
  cli.add_option("--only", only, "Run only these criteria (1-7)")->delimiter(',');
  CLI11_PARSE(cli, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  Workspace ws(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"parameter counts", parameter_counts},
      {"dataset protocol", [&] { return dataset_protocol(ws); }},
      {"FDTD physics", fdtd_physics},
      {"gradients and optimizer", gradient_and_optimizer},
      {"training reproduction", [&] { return training_reproduction(ws); }},
      {"noise trend", [&] { return noise_trend(ws); }},
      {"determinism", [&] { return determinism(ws); }},
  };

  int failed = 0, ran = 0;
  const auto t0 = Clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    ++ran;
    Outcome o;
    const auto tc = Clock::now();
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[k].first << ": " << o.detail << "  ["
              << num(seconds_since(tc), 4) << " s]" << std::endl;
  }
  std::cerr << "acceptance: " << ran - failed << "/" << ran << " passed in " << num(seconds_since(t0), 5) << " s\n";
  return failed == 0 ? 0 : 1;
}
