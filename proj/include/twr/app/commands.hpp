#pragma once

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "twr/app/run_dir.hpp"
#include "twr/app/svg.hpp"
#include "twr/dataset/generate.hpp"
#include "twr/dataset/io.hpp"
#include "twr/em/snapshot.hpp"
#include "twr/nn/checkpoint.hpp"
#include "twr/nn/train.hpp"

namespace twr::app {

using nlohmann::json;

// ---------------------------------------------------------------- configs

inline std::vector<scene::Scenario> parse_scenarios(const std::vector<std::string>& names) {
  std::vector<scene::Scenario> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(scene::kAllScenarios.begin(), scene::kAllScenarios.end());
      return out;
    }
    out.push_back(scene::scenario_from_string(n));
  }
  if (out.empty()) throw InvalidArgument("no scenarios given");
  return out;
}

inline dataset::GenConfig gen_config_from_json(const json& j) {
  dataset::GenConfig c;
  c.layout = scene::layout_from_json(j.value("layout", json::object()));
  std::vector<std::string> names;
  for (const auto& s : j.value("scenarios", json::array({"all"}))) names.push_back(s.get<std::string>());
  c.scenarios = parse_scenarios(names);
  c.n_targets = j.value("targets", 1);
  c.seed = j.value("seed", std::uint64_t{1});
  return c;
}

// Everything that determines a training run apart from the dataset bytes.
struct TrainOptions {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> split_seed;  // defaults to seed
  std::optional<double> learning_rate;      // paper default for the mode when unset
  std::optional<std::size_t> epochs;
  std::size_t batch_size = 30;
  double dropout = nn::kDefaultDropout;
  std::optional<bool> early_stop;  // on for noisy data, off otherwise, when unset
  std::size_t patience = 100;
  double tol_cm = 5.0;
  std::optional<double> snr_db;

  std::uint64_t resolved_split_seed() const { return split_seed.value_or(seed); }
};

inline json to_json(const TrainOptions& o) {
  json j = {{"seed", o.seed},       {"split_seed", o.resolved_split_seed()}, {"batch_size", o.batch_size},
            {"dropout", o.dropout}, {"patience", o.patience},               {"tol_cm", o.tol_cm}};
  j["learning_rate"] = o.learning_rate ? json(*o.learning_rate) : json(nullptr);
  j["epochs"] = o.epochs ? json(*o.epochs) : json(nullptr);
  j["early_stop"] = o.early_stop ? json(*o.early_stop) : json(nullptr);
  j["snr_db"] = o.snr_db ? json(*o.snr_db) : json(nullptr);
  return j;
}

inline TrainOptions train_options_from_json(const json& j) {
  TrainOptions o;
  o.seed = j.value("seed", o.seed);
  if (j.contains("split_seed") && !j["split_seed"].is_null()) o.split_seed = j["split_seed"].get<std::uint64_t>();
  o.batch_size = j.value("batch_size", o.batch_size);
  o.dropout = j.value("dropout", o.dropout);
  o.patience = j.value("patience", o.patience);
  o.tol_cm = j.value("tol_cm", o.tol_cm);
  if (j.contains("learning_rate") && !j["learning_rate"].is_null()) o.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("epochs") && !j["epochs"].is_null()) o.epochs = j["epochs"].get<std::size_t>();
  if (j.contains("early_stop") && !j["early_stop"].is_null()) o.early_stop = j["early_stop"].get<bool>();
  if (j.contains("snr_db") && !j["snr_db"].is_null()) o.snr_db = j["snr_db"].get<double>();
  return o;
}

inline constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;  // "noise"

inline std::uint64_t noise_seed(std::uint64_t seed, double snr_db) {
  return derive_seed(derive_seed(seed, kNoiseStream), std::bit_cast<std::uint64_t>(snr_db));
}

inline int n_targets_of(const dataset::Dataset& ds) {
  const auto ld = ds.label_dim();
  if (ld != 2 && ld != 4) throw InvalidArgument("dataset labels must describe one or two targets");
  return static_cast<int>(ld / 2);
}

inline nn::ModelSpec model_for(int n_targets, double dropout, std::size_t input_dim) {
  return n_targets == 1 ? nn::build_single_target_model(dropout, input_dim)
                        : nn::build_two_target_model(dropout, input_dim);
}

inline nn::TrainConfig resolve_train_config(const TrainOptions& o, int n_targets) {
  auto c = nn::TrainConfig::paper_defaults(n_targets);
  if (o.learning_rate) c.learning_rate = *o.learning_rate;
  if (o.epochs) c.max_epochs = *o.epochs;
  c.batch_size = o.batch_size;
  c.seed = o.seed;
  c.tol_cm = o.tol_cm;
  c.early_stop.enabled = o.early_stop.value_or(o.snr_db.has_value());
  c.early_stop.patience = o.patience;
  return c;
}

// Noise (if any), split and train-split standardization, in that order.
inline dataset::Dataset prepare_dataset(dataset::Dataset ds, const TrainOptions& o) {
  if (o.snr_db) ds = dataset::with_awgn(std::move(ds), *o.snr_db, noise_seed(o.seed, *o.snr_db));
  ds = dataset::split_dataset(std::move(ds), o.resolved_split_seed());
  dataset::fit_train_standardizer(ds);
  return ds;
}

inline std::string scenario_label(const dataset::Dataset& ds) {
  std::vector<bool> seen(scene::kAllScenarios.size(), false);
  for (const auto& s : ds.samples) seen[static_cast<std::size_t>(s.scenario)] = true;
  std::size_t n = 0, last = 0;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k]) ++n, last = k;
  }
  if (n == seen.size()) return "all data";
  if (n == 1) return std::string(scene::to_string(scene::kAllScenarios[last]));
  std::string s;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) continue;
    if (!s.empty()) s += "+";
    s += scene::to_string(scene::kAllScenarios[k]);
  }
  return s;
}

inline std::string fmt(double v) { return dataset::format_double(v); }

// ---------------------------------------------------------------- gen

struct GenResult {
  fs::path run_dir;
  std::size_t samples = 0;
};

inline GenResult cmd_gen(const dataset::GenConfig& c, const fs::path& out_root, bool write_csv, unsigned jobs,
                         std::ostream& log,
                         const std::optional<std::pair<fs::path, std::string>>& config_file = std::nullopt) {
  auto cfg = c;
  cfg.jobs = jobs;
  const json config = dataset::gen_config_json(cfg);
  // Fails on bad geometry or impossible pair counts before anything is written.
  const auto plan = dataset::plan_placements(cfg);
  log << "gen: " << plan.size() << " simulations (" << cfg.n_targets << " target(s), "
      << cfg.scenarios.size() << " scenario(s))\n";
  std::size_t last_pct = 0;
  auto ds = dataset::generate_dataset(cfg, [&](std::size_t done, std::size_t total) {
    const std::size_t pct = 100 * done / total;
    if (pct >= last_pct + 10 || done == total) {
      last_pct = pct;
      log << "  " << done << "/" << total << "\n";
    }
  });
  RunDir run(out_root, "gen", config);
  if (config_file) run.add_input("scene_config", config_file->first, config_file->second);
  dataset::save_dataset(ds, run.file("dataset.twrd"));
  run.record_output("dataset.twrd");
  if (write_csv) {
    std::ostringstream os;
    dataset::export_csv(ds, os);
    run.write_text("dataset.csv", os.str());
  }
  run.set_result({{"samples", ds.size()}, {"feature_dim", ds.feature_dim()}, {"label_dim", ds.label_dim()}});
  run.write_manifest();
  log << "gen: wrote " << ds.size() << " samples to " << run.file("dataset.twrd").string() << "\n";
  return {run.path(), ds.size()};
}

// ---------------------------------------------------------------- train

inline std::string history_header() { return "epoch,train_loss,train_hit_acc,val_loss,val_hit_acc\n"; }

inline std::string history_row(const nn::EpochRecord& r) {
  return std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.train_acc) + "," + fmt(r.val_loss) + "," +
         fmt(r.val_acc) + "\n";
}

inline void write_history_plots(RunDir& run, const nn::History& h, const std::string& title) {
  Series tl{"train", {}, {}, "#1f77b4"}, vl{"validation", {}, {}, "#d62728"};
  Series ta{"train", {}, {}, "#1f77b4"}, va{"validation", {}, {}, "#d62728"};
  for (const auto& r : h) {
    const double e = static_cast<double>(r.epoch);
    tl.x.push_back(e), tl.y.push_back(r.train_loss);
    vl.x.push_back(e), vl.y.push_back(r.val_loss);
    ta.x.push_back(e), ta.y.push_back(r.train_acc);
    va.x.push_back(e), va.y.push_back(r.val_acc);
  }
  run.write_text("loss.svg", render_svg({title + ": MSLE", "epoch", "MSLE", {tl, vl}, true}));
  run.write_text("accuracy.svg", render_svg({title + ": hit-accuracy", "epoch", "hit-accuracy", {ta, va}}));
}

struct TrainRunResult {
  fs::path run_dir;
  nn::TrainResult result;
  nn::Metrics train, val, test;
};

inline TrainRunResult cmd_train(const fs::path& dataset_path, const TrainOptions& opt,
                                std::optional<int> expect_targets, const fs::path& out_root, std::ostream& log) {
  require_file(dataset_path, "dataset");
  const auto raw = dataset::load_dataset(dataset_path);
  const int nt = n_targets_of(raw);
  if (expect_targets && *expect_targets != nt) {
    throw InvalidArgument("--targets " + std::to_string(*expect_targets) + " but the dataset holds " +
                          std::to_string(nt) + "-target samples");
  }
  const auto ds = prepare_dataset(raw, opt);
  const auto spec = model_for(nt, opt.dropout, ds.feature_dim());
  const auto tc = resolve_train_config(opt, nt);
  const std::string dataset_hash = file_content_hash(dataset_path.string());
  const json config = {{"dataset_sha256", dataset_hash}, {"mode", nt == 1 ? "single" : "two"},
                       {"wall_model", scenario_label(ds)}, {"options", to_json(opt)},
                       {"resolved", {{"learning_rate", tc.learning_rate}, {"epochs", tc.max_epochs},
                                     {"early_stop", tc.early_stop.enabled}}}};

  RunDir run(out_root, "train", config);
  run.add_input("dataset", dataset_path);
  std::ofstream hist(run.file("history.csv"), std::ios::trunc);
  hist << history_header() << std::flush;
  log << "train: " << (nt == 1 ? "single" : "two") << "-target model, " << spec.parameter_count()
      << " parameters, " << ds.indices(dataset::Split::train).size() << " train / "
      << ds.indices(dataset::Split::val).size() << " val samples, up to " << tc.max_epochs << " epochs\n";

  TrainRunResult out;
  out.run_dir = run.path();
  try {
    out.result = nn::train(spec, ds, tc, [&](const nn::EpochRecord& r) {
      hist << history_row(r) << std::flush;
      if (r.epoch % 500 == 0) {
        log << "  epoch " << r.epoch << "  loss " << r.train_loss << "  val " << r.val_loss << "  val hit "
            << r.val_acc << "\n";
      }
    });
  } catch (const TrainingDiverged& e) {
    hist.close();
    run.record_output("history.csv");
    run.set_result({{"error", e.what()}, {"epoch", e.epoch()}});
    run.write_manifest("diverged");
    throw;
  }
  hist.close();
  run.record_output("history.csv");

  const auto tr = nn::split_matrices(ds, dataset::Split::train);
  const auto va = nn::split_matrices(ds, dataset::Split::val);
  const auto te = nn::split_matrices(ds, dataset::Split::test);
  out.train = nn::evaluate(spec, out.result.params, tr.x, tr.y, tc.tol_cm);
  out.val = nn::evaluate(spec, out.result.params, va.x, va.y, tc.tol_cm);
  out.test = nn::evaluate(spec, out.result.params, te.x, te.y, tc.tol_cm);

  nn::TrainedModel model{spec, out.result.params, *ds.standardization, json::object()};
  model.meta = {{"mode", nt == 1 ? "single" : "two"},
                {"dataset_sha256", dataset_hash},
                {"split_seed", opt.resolved_split_seed()},
                {"standardizer_hash", to_hex(ds.standardization->hash())},
                {"options", to_json(opt)},
                {"best_epoch", out.result.best_epoch},
                {"epochs_run", out.result.history.size()}};
  nn::save_model(model, run.file("model.twrm"));
  run.record_output("model.twrm");
  write_history_plots(run, out.result.history, scenario_label(ds));

  const auto metrics = [](const nn::Metrics& m) { return json{{"msle", m.loss}, {"hit_accuracy", m.acc}}; };
  run.set_result({{"wall_model", scenario_label(ds)},
                  {"mode", nt == 1 ? "single" : "two"},
                  {"snr_db", opt.snr_db ? json(*opt.snr_db) : json(nullptr)},
                  {"epochs_run", out.result.history.size()},
                  {"best_epoch", out.result.best_epoch},
                  {"stopped_early", out.result.stopped_early},
                  {"train", metrics(out.train)},
                  {"val", metrics(out.val)},
                  {"test", metrics(out.test)}});
  run.write_manifest();
  log << "train: loss " << out.train.loss << "  val loss " << out.val.loss << "  hit-acc " << out.train.acc
      << "  val hit-acc " << out.val.acc << "  -> " << run.path().string() << "\n";
  return out;
}

// ---------------------------------------------------------------- eval

struct EvalResult {
  fs::path run_dir;
  std::string split;
  std::size_t samples = 0;
  nn::Metrics metrics;
};

inline EvalResult cmd_eval(const fs::path& model_path, const fs::path& dataset_path, const std::string& split,
                           std::optional<double> tol_override, const fs::path& out_root, std::ostream& log) {
  require_file(model_path, "checkpoint");
  require_file(dataset_path, "dataset");
  if (split != "all") dataset::split_from_string(split);
  const auto model = nn::load_model(model_path);
  auto raw = dataset::load_dataset(dataset_path);
  if (raw.feature_dim() != model.spec.input_dim) {
    throw InvalidArgument("dataset feature width " + std::to_string(raw.feature_dim()) +
                          " does not match the checkpoint input width " + std::to_string(model.spec.input_dim));
  }
  if (n_targets_of(raw) * 2 != static_cast<int>(model.spec.output_dim())) {
    throw InvalidArgument("dataset target count does not match the checkpoint");
  }
  auto opt = train_options_from_json(model.meta.value("options", json::object()));
  opt.split_seed = model.meta.value("split_seed", opt.resolved_split_seed());
  const auto ds = prepare_dataset(std::move(raw), opt);
  const std::string want = model.meta.value("standardizer_hash", to_hex(model.standardizer.hash()));
  const std::string got = to_hex(ds.standardization->hash());
  if (want != got) {
    throw InvalidArgument("standardizer hash mismatch: checkpoint " + want + " vs dataset " + got +
                          " (the model was trained on different data or a different split)");
  }
  const double tol = tol_override.value_or(opt.tol_cm);

  EvalResult res;
  res.split = split;
  nn::SplitData d;
  if (split == "all") {
    d.x = nn::Matrix(ds.size(), ds.feature_dim());
    d.y = nn::Matrix(ds.size(), ds.label_dim());
    for (std::size_t r = 0; r < ds.size(); ++r) {
      std::copy(ds.samples[r].features.begin(), ds.samples[r].features.end(), d.x.row(r));
      std::copy(ds.samples[r].labels.begin(), ds.samples[r].labels.end(), d.y.row(r));
    }
  } else {
    d = nn::split_matrices(ds, dataset::split_from_string(split), false);
  }
  res.samples = d.x.rows;
  if (res.samples == 0) throw TooFewSamples("eval: split '" + split + "' is empty");
  const auto pred = model.predict_raw(d.x);
  res.metrics = {nn::msle(d.y, pred), nn::hit_accuracy(pred, d.y, tol)};

  const json config = {{"model_sha256", file_content_hash(model_path.string())},
                       {"dataset_sha256", file_content_hash(dataset_path.string())},
                       {"split", split},
                       {"tol_cm", tol}};
  RunDir run(out_root, "eval", config);
  run.add_input("model", model_path);
  run.add_input("dataset", dataset_path);
  const json metrics = {{"split", split}, {"samples", res.samples}, {"msle", res.metrics.loss},
                        {"hit_accuracy", res.metrics.acc}, {"tol_cm", tol}};
  run.write_text("metrics.json", metrics.dump(2) + "\n");
  run.set_result(metrics);
  run.write_manifest();
  res.run_dir = run.path();
  log << "eval: split=" << split << " samples=" << res.samples << " msle=" << fmt(res.metrics.loss)
      << " hit_accuracy=" << fmt(res.metrics.acc) << " (tol " << tol << " cm)\n";
  return res;
}

// ---------------------------------------------------------------- noise sweep

struct SweepRow {
  double snr_db;  // +inf marks the noise-free reference
  std::vector<double> val_acc;  // one per seed
  double mean() const {
    double s = 0;
    for (double v : val_acc) s += v;
    return s / static_cast<double>(val_acc.size());
  }
  double stddev() const {
    const double m = mean();
    double s = 0;
    for (double v : val_acc) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(val_acc.size()));
  }
};

struct SweepResult {
  fs::path run_dir;
  std::vector<SweepRow> rows;
  std::optional<SweepRow> clean;
};

// For every seed and SNR: corrupt the raw features, re-split and re-fit the
// standardizer, train with early stopping and record validation hit-accuracy.
// The noise-free reference uses the same protocol.
inline SweepResult cmd_noise_sweep(const fs::path& dataset_path, const std::vector<double>& snrs,
                                   const std::vector<std::uint64_t>& seeds, const TrainOptions& base,
                                   bool with_clean, const fs::path& out_root, std::ostream& log) {
  require_file(dataset_path, "dataset");
  if (snrs.empty()) throw InvalidArgument("noise-sweep: SNR list is empty");
  if (seeds.empty()) throw InvalidArgument("noise-sweep: seed list is empty");
  const auto raw = dataset::load_dataset(dataset_path);
  const int nt = n_targets_of(raw);
  const json config = {{"dataset_sha256", file_content_hash(dataset_path.string())},
                       {"snr_db", snrs},
                       {"seeds", seeds},
                       {"clean_reference", with_clean},
                       {"options", to_json(base)}};
  RunDir run(out_root, "noise-sweep", config);
  run.add_input("dataset", dataset_path);

  std::vector<double> levels = snrs;
  if (with_clean) levels.push_back(std::numeric_limits<double>::infinity());
  std::map<double, SweepRow> rows;
  std::string runs_csv = "seed,snr_db,epochs_run,best_epoch,val_loss,val_hit_acc\n";
  for (auto seed : seeds) {
    for (double snr : levels) {
      TrainOptions o = base;
      o.seed = seed;
      o.split_seed.reset();
      o.snr_db = std::isfinite(snr) ? std::optional<double>(snr) : std::nullopt;
      o.early_stop = true;
      const auto ds = prepare_dataset(raw, o);
      const auto spec = model_for(nt, o.dropout, ds.feature_dim());
      const auto res = nn::train(spec, ds, resolve_train_config(o, nt));
      const auto va = nn::split_matrices(ds, dataset::Split::val);
      const auto m = nn::evaluate(spec, res.params, va.x, va.y, o.tol_cm);
      rows[snr].snr_db = snr;
      rows[snr].val_acc.push_back(m.acc);
      runs_csv += std::to_string(seed) + "," + (std::isfinite(snr) ? fmt(snr) : "inf") + "," +
                  std::to_string(res.history.size()) + "," + std::to_string(res.best_epoch) + "," + fmt(m.loss) +
                  "," + fmt(m.acc) + "\n";
      log << "  seed " << seed << "  snr " << (std::isfinite(snr) ? fmt(snr) : "none") << " dB  val hit-acc "
          << m.acc << "  (" << res.history.size() << " epochs)\n";
    }
  }
  SweepResult out;
  out.run_dir = run.path();
  std::string header = "snr_db,mean_val_hit_acc,std_val_hit_acc";
  for (auto s : seeds) header += ",seed_" + std::to_string(s);
  const auto row_csv = [&](const SweepRow& r) {
    std::string line = (std::isfinite(r.snr_db) ? fmt(r.snr_db) : std::string("inf")) + "," + fmt(r.mean()) + "," +
                       fmt(r.stddev());
    for (double v : r.val_acc) line += "," + fmt(v);
    return line + "\n";
  };
  std::string sweep_csv = header + "\n";
  Series curve{"mean over seeds", {}, {}, "#1f77b4", true};
  for (double snr : snrs) {
    const auto& r = rows.at(snr);
    out.rows.push_back(r);
    sweep_csv += row_csv(r);
    curve.x.push_back(snr);
    curve.y.push_back(r.mean());
  }
  run.write_text("sweep.csv", sweep_csv);
  run.write_text("sweep_runs.csv", runs_csv);
  Chart chart{"Validation hit-accuracy vs SNR", "SNR (dB)", "validation hit-accuracy", {curve}};
  json result = json::array();
  for (const auto& r : out.rows) result.push_back({{"snr_db", r.snr_db}, {"mean", r.mean()}, {"std", r.stddev()}});
  json summary = {{"sweep", result}};
  if (with_clean) {
    out.clean = rows.at(std::numeric_limits<double>::infinity());
    run.write_text("clean.csv", header + "\n" + row_csv(*out.clean));
    Series ref{"no noise", {snrs.front(), snrs.back()}, {out.clean->mean(), out.clean->mean()}, "#2ca02c"};
    chart.series.push_back(ref);
    summary["clean"] = {{"mean", out.clean->mean()}, {"std", out.clean->stddev()}};
  }
  run.write_text("sweep.svg", render_svg(chart));
  run.set_result(summary);
  run.write_manifest();
  log << "noise-sweep: -> " << run.path().string() << "\n";
  return out;
}

// ---------------------------------------------------------------- report

struct ReportRow {
  std::string run;
  std::string wall_model;
  std::string mode;
  std::string snr;
  double loss, val_loss, acc, val_acc;
};

inline int wall_order(const std::string& w) {
  for (std::size_t k = 0; k < scene::kAllScenarios.size(); ++k) {
    if (w == scene::to_string(scene::kAllScenarios[k])) return static_cast<int>(k);
  }
  return w == "all data" ? 100 : 50;
}

struct ReportResult {
  fs::path run_dir;
  std::vector<ReportRow> rows;
  std::vector<std::string> missing;
};

// Collects every completed train / noise-sweep run below `runs_dir` into a
// Table V style summary.
inline ReportResult cmd_report(const fs::path& runs_dir, const fs::path& out_root, std::ostream& log) {
  if (!fs::is_directory(runs_dir)) throw LoadError("runs directory not found: " + runs_dir.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(runs_dir)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  ReportResult res;
  std::vector<std::pair<std::string, json>> sweeps;
  std::vector<std::pair<std::string, fs::path>> histories;
  json sources = json::object();
  for (const auto& d : dirs) {
    const auto mpath = d / kManifestName;
    const std::string name = d.filename().string();
    if (!fs::exists(mpath)) {
      res.missing.push_back(name);
      continue;
    }
    json m;
    try {
      m = read_json_file(mpath);
    } catch (const std::exception&) {
      res.missing.push_back(name);
      continue;
    }
    const std::string cmd = m.value("command", "");
    if (cmd == "report" || cmd == "gen" || cmd == "eval" || cmd == "snapshot") continue;
    if (m.value("status", "") != "complete" || !m.contains("result")) {
      res.missing.push_back(name);
      continue;
    }
    sources[name] = file_content_hash(mpath.string());
    const auto& r = m["result"];
    if (cmd == "train") {
      const auto snr = r["snr_db"];
      res.rows.push_back({name, r.value("wall_model", "?"), r.value("mode", "?"),
                          snr.is_null() ? "none" : fmt(snr.get<double>()), r["train"]["msle"].get<double>(),
                          r["val"]["msle"].get<double>(), r["train"]["hit_accuracy"].get<double>(),
                          r["val"]["hit_accuracy"].get<double>()});
      histories.emplace_back(name, d / "history.csv");
    } else if (cmd == "noise-sweep") {
      sweeps.emplace_back(name, r);
    }
  }
  if (res.rows.empty() && sweeps.empty()) {
    throw LoadError("no completed train or noise-sweep runs under " + runs_dir.string());
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [](const ReportRow& a, const ReportRow& b) {
    if (a.mode != b.mode) return a.mode > b.mode;  // single before two
    if (wall_order(a.wall_model) != wall_order(b.wall_model)) return wall_order(a.wall_model) < wall_order(b.wall_model);
    return a.snr < b.snr;
  });

  RunDir run(out_root, "report", {{"runs_dir", runs_dir.string()}, {"sources", sources}});
  std::string csv = "wall_model,mode,snr_db,loss,val_loss,hit_acc,val_hit_acc,run\n";
  std::ostringstream txt;
  char line[256];
  std::snprintf(line, sizeof line, "%-26s %-7s %-6s %10s %10s %9s %9s\n", "wall model", "mode", "SNR", "loss",
                "val loss", "hit-acc", "val hit");
  txt << line << std::string(83, '-') << "\n";
  for (const auto& r : res.rows) {
    csv += r.wall_model + "," + r.mode + "," + r.snr + "," + fmt(r.loss) + "," + fmt(r.val_loss) + "," + fmt(r.acc) +
           "," + fmt(r.val_acc) + "," + r.run + "\n";
    std::snprintf(line, sizeof line, "%-26s %-7s %-6s %10.5f %10.5f %8.1f%% %8.1f%%\n", r.wall_model.c_str(),
                  r.mode.c_str(), r.snr.c_str(), r.loss, r.val_loss, 100 * r.acc, 100 * r.val_acc);
    txt << line;
  }
  txt << "\nhit-accuracy: fraction of samples whose every predicted target center lies within the\n"
         "hit radius of the true center (default 5 cm).\n";
  for (const auto& [name, r] : sweeps) {
    txt << "\nnoise sweep " << name << "\n";
    for (const auto& row : r["sweep"]) {
      std::snprintf(line, sizeof line, "  SNR %6s dB   val hit-acc %5.1f%% +- %4.1f\n",
                    fmt(row["snr_db"].get<double>()).c_str(), 100 * row["mean"].get<double>(),
                    100 * row["std"].get<double>());
      txt << line;
    }
    if (r.contains("clean")) {
      std::snprintf(line, sizeof line, "  no noise       val hit-acc %5.1f%% +- %4.1f\n",
                    100 * r["clean"]["mean"].get<double>(), 100 * r["clean"]["std"].get<double>());
      txt << line;
    }
  }
  if (!res.missing.empty()) {
    txt << "\nincomplete or missing manifests:\n";
    for (const auto& m : res.missing) txt << "  " << m << "\n";
  }
  run.write_text("report.csv", csv);
  run.write_text("report.txt", txt.str());

  if (!histories.empty()) {
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    Chart c{"Validation MSLE per run", "epoch", "validation MSLE", {}, true};
    for (std::size_t k = 0; k < histories.size(); ++k) {
      std::ifstream in(histories[k].second);
      std::string l;
      Series s{histories[k].first, {}, {}, palette[k % 10]};
      std::getline(in, l);
      while (std::getline(in, l)) {
        std::stringstream ss(l);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
        if (v.size() == 5) s.x.push_back(v[0]), s.y.push_back(v[3]);
      }
      c.series.push_back(std::move(s));
    }
    run.write_text("report.svg", render_svg(c));
  }
  run.set_result({{"rows", res.rows.size()}, {"sweeps", sweeps.size()}, {"missing", res.missing}});
  run.write_manifest();
  res.run_dir = run.path();
  log << txt.str() << "report: -> " << run.path().string() << "\n";
  return res;
}

// ---------------------------------------------------------------- snapshot

struct SnapshotOptions {
  scene::SceneLayout layout;
  scene::Scenario scenario = scene::Scenario::homogeneous;
  std::vector<scene::Position> centers;
  std::vector<double> sizes;
  std::optional<std::int64_t> steps;  // defaults to the layout's run length
};

// Runs one scene and writes the final Ez, Hx, Hy and eps_zz maps as CSV grids
// (one line per y-row, top row first).
inline fs::path cmd_snapshot(const SnapshotOptions& o, const fs::path& out_root, std::ostream& log) {
  const auto grid = o.layout.grid();
  const auto sc = o.layout.make_scene(o.scenario, o.centers, o.sizes);
  scene::validate_scene(sc, grid);
  const auto steps = o.steps.value_or(o.layout.total_steps);
  if (steps < 1) throw InvalidArgument("snapshot: step count must be positive");
  json targets = json::array();
  for (std::size_t k = 0; k < o.centers.size(); ++k) {
    targets.push_back({{"x_cm", o.centers[k].x}, {"y_cm", o.centers[k].y}, {"size_m", o.sizes[k]}});
  }
  const json config = {{"layout", scene::to_json(o.layout)},
                       {"scenario", std::string(scene::to_string(o.scenario))},
                       {"targets", targets},
                       {"steps", steps}};
  const auto m = scene::build_material_map(sc, grid);
  em::FieldState s(grid);
  em::Solver solver(grid, m, o.layout.pml);
  for (std::int64_t q = 0; q < steps; ++q) {
    em::apply_source(s, o.layout.source, grid);
    solver.step(s);
  }
  if (!s.all_finite()) throw SimulationDiverged(steps, "snapshot: non-finite field");
  RunDir run(out_root, "snapshot", config);
  const auto grid_csv = [&](const Array2D<double>& a) {
    std::ostringstream os;
    em::write_csv_grid(os, a, grid);
    return os.str();
  };
  run.write_text("ez.csv", grid_csv(s.ez));
  run.write_text("hx.csv", grid_csv(s.hx));
  run.write_text("hy.csv", grid_csv(s.hy));
  run.write_text("eps_zz.csv", grid_csv(m.eps_zz));
  run.set_result({{"nx", grid.nx}, {"ny", grid.ny}, {"dx_m", grid.dx}, {"dt_s", grid.dt}, {"steps", steps}});
  run.write_manifest();
  log << "snapshot: " << steps << " steps -> " << run.path().string() << "\n";
  return run.path();
}

}  // namespace twr::app
