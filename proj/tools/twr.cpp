// twr: through-wall radar simulation, dataset generation and localization.
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twr/app/commands.hpp"

namespace {

using namespace twr;
using nlohmann::json;

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw InvalidArgument("not a number: '" + cell + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> split_names(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty()) out.push_back(cell);
    }
  }
  return out;
}

// A --config file is either a scene layout or the manifest of an earlier run.
json load_config(const std::string& path, std::string* sha256 = nullptr) {
  app::require_file(path, "config");
  const std::string text = read_file(path);
  if (sha256) *sha256 = content_hash(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(path + ": " + e.what());
  }
}

bool is_manifest(const json& j) { return j.is_object() && j.contains("command") && j.contains("config"); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Through-wall radar FDTD simulation and DNN target localization"};
  cli.require_subcommand(1);
  std::string out_root = app::default_output_root().string();
  cli.add_option("--out", out_root, "Output root; each run writes a fresh directory below it (env TWR_OUTPUT_ROOT)");

  // gen
  auto* gen = cli.add_subcommand("gen", "Simulate target placements into a dataset file");
  std::string gen_config;
  int gen_targets = 1;
  std::vector<std::string> gen_scenarios{"all"};
  std::uint64_t gen_seed = 1;
  unsigned gen_jobs = 0;
  bool gen_csv = false;
  gen->add_option("--config", gen_config, "Scene layout JSON, or a gen manifest to replay");
  gen->add_option("--targets", gen_targets, "Targets per scene")->check(CLI::IsMember({1, 2}));
  gen->add_option("--scenarios", gen_scenarios, "Wall scenarios (comma separated) or 'all'");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--jobs", gen_jobs, "Worker threads (0 = all cores); never changes the output");
  gen->add_flag("--csv", gen_csv, "Also export the samples as CSV");

  // train
  auto* train = cli.add_subcommand("train", "Train the localization network on a dataset");
  std::string train_dataset, train_config;
  std::optional<int> train_targets;
  app::TrainOptions topt;
  std::optional<double> t_lr, t_snr;
  std::optional<std::size_t> t_epochs;
  std::optional<std::uint64_t> t_split_seed;
  bool t_early = false, t_no_early = false;
  train->add_option("--dataset", train_dataset, "Dataset file from gen")->required();
  train->add_option("--config", train_config, "Train manifest to replay (options only)");
  train->add_option("--targets", train_targets, "Expected targets per sample")->check(CLI::IsMember({1, 2}));
  train->add_option("--seed", topt.seed, "Training seed (initialization, shuffling, dropout)");
  train->add_option("--split-seed", t_split_seed, "Split seed (defaults to --seed)");
  train->add_option("--epochs", t_epochs, "Epoch budget (default 5000 single / 1000 two-target)");
  train->add_option("--lr", t_lr, "Learning rate (default 1e-4 single / 1e-3 two-target)");
  train->add_option("--batch", topt.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  train->add_option("--dropout", topt.dropout, "Dropout rate of every dropout layer")->check(CLI::Range(0.0, 0.999));
  train->add_option("--snr", t_snr, "Train on features corrupted by AWGN at this SNR (dB)");
  train->add_option("--patience", topt.patience, "Early-stopping patience in epochs");
  train->add_flag("--early-stop", t_early, "Enable early stopping (default: only with --snr)");
  train->add_flag("--no-early-stop", t_no_early, "Disable early stopping");
  train->add_option("--tol-cm", topt.tol_cm, "Hit radius in cm")->check(CLI::PositiveNumber);

  // eval
  auto* eval = cli.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  std::string eval_model, eval_dataset, eval_split = "val";
  std::optional<double> eval_tol;
  eval->add_option("--model", eval_model, "Checkpoint from train")->required();
  eval->add_option("--dataset", eval_dataset, "Dataset file")->required();
  eval->add_option("--split", eval_split, "train, val, test or all")
      ->check(CLI::IsMember({"train", "val", "validation", "test", "all"}));
  eval->add_option("--tol-cm", eval_tol, "Hit radius in cm (default: the training value)")->check(CLI::PositiveNumber);

  // noise-sweep
  auto* sweep = cli.add_subcommand("noise-sweep", "Validation hit-accuracy against SNR");
  std::string sweep_dataset, sweep_snr = "0,5,10,15,20,25,30", sweep_seeds = "1,2,3";
  app::TrainOptions sopt;
  std::optional<double> s_lr;
  std::optional<std::size_t> s_epochs;
  bool s_no_clean = false;
  sweep->add_option("--dataset", sweep_dataset, "Dataset file")->required();
  sweep->add_option("--snr", sweep_snr, "Comma-separated SNR list in dB");
  sweep->add_option("--seeds", sweep_seeds, "Comma-separated seed list");
  sweep->add_option("--epochs", s_epochs, "Epoch budget per run");
  sweep->add_option("--lr", s_lr, "Learning rate");
  sweep->add_option("--batch", sopt.batch_size, "Mini-batch size")->check(CLI::PositiveNumber);
  sweep->add_option("--dropout", sopt.dropout, "Dropout rate")->check(CLI::Range(0.0, 0.999));
  sweep->add_option("--patience", sopt.patience, "Early-stopping patience in epochs");
  sweep->add_option("--tol-cm", sopt.tol_cm, "Hit radius in cm")->check(CLI::PositiveNumber);
  sweep->add_flag("--no-clean", s_no_clean, "Skip the noise-free reference runs");

  // report
  auto* report = cli.add_subcommand("report", "Summarize completed runs in a Table V style report");
  std::string report_runs;
  report->add_option("--runs", report_runs, "Directory holding run directories (default: the output root)");

  // snapshot
  auto* snap = cli.add_subcommand("snapshot", "Export Ez/Hx/Hy field maps of one scene as CSV grids");
  std::string snap_config, snap_scenario = "homogeneous";
  std::vector<std::string> snap_targets;
  std::optional<std::int64_t> snap_steps;
  snap->add_option("--config", snap_config, "Scene layout JSON");
  snap->add_option("--scenario", snap_scenario, "Wall scenario");
  snap->add_option("--target", snap_targets, "Target as x_cm,y_cm,size_m (repeatable)");
  snap->add_option("--steps", snap_steps, "Time steps to run (default: the layout's run length)");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (gen->parsed()) {
      twr::dataset::GenConfig c;
      std::optional<std::pair<std::filesystem::path, std::string>> cfg_path;
      bool replay = false;
      if (!gen_config.empty()) {
        std::string sha;
        const json j = load_config(gen_config, &sha);
        cfg_path = {gen_config, sha};
        replay = is_manifest(j);
        if (replay) {
          if (j["command"] != "gen") throw InvalidArgument("--config manifest is not from gen");
          c = app::gen_config_from_json(j["config"]);
        } else {
          c.layout = scene::layout_from_json(j);
        }
      }
      if (!replay) {
        c.n_targets = gen_targets;
        c.scenarios = app::parse_scenarios(split_names(gen_scenarios));
        c.seed = gen_seed;
      }
      app::cmd_gen(c, out_root, gen_csv, gen_jobs, std::cerr, cfg_path);
    } else if (train->parsed()) {
      if (!train_config.empty()) {
        const json j = load_config(train_config);
        if (!is_manifest(j) || j["command"] != "train") throw InvalidArgument("--config must be a train manifest");
        topt = app::train_options_from_json(j["config"]["options"]);
      }
      if (t_lr) topt.learning_rate = t_lr;
      if (t_epochs) topt.epochs = t_epochs;
      if (t_snr) topt.snr_db = t_snr;
      if (t_split_seed) topt.split_seed = t_split_seed;
      if (t_early && t_no_early) throw InvalidArgument("--early-stop and --no-early-stop are exclusive");
      if (t_early) topt.early_stop = true;
      if (t_no_early) topt.early_stop = false;
      app::cmd_train(train_dataset, topt, train_targets, out_root, std::cerr);
    } else if (eval->parsed()) {
      const auto r = app::cmd_eval(eval_model, eval_dataset, eval_split == "validation" ? "val" : eval_split,
                                   eval_tol, out_root, std::cerr);
      std::cout << "split=" << r.split << " samples=" << r.samples << " msle=" << app::fmt(r.metrics.loss)
                << " hit_accuracy=" << app::fmt(r.metrics.acc) << "\n";
    } else if (sweep->parsed()) {
      sopt.learning_rate = s_lr;
      sopt.epochs = s_epochs;
      std::vector<std::uint64_t> seeds;
      for (double s : parse_number_list(sweep_seeds)) {
        if (s < 0 || s != std::floor(s)) throw InvalidArgument("seeds must be non-negative integers");
        seeds.push_back(static_cast<std::uint64_t>(s));
      }
      app::cmd_noise_sweep(sweep_dataset, parse_number_list(sweep_snr), seeds, sopt, !s_no_clean, out_root,
                           std::cerr);
    } else if (report->parsed()) {
      app::cmd_report(report_runs.empty() ? out_root : report_runs, out_root, std::cerr);
    } else if (snap->parsed()) {
      app::SnapshotOptions o;
      if (!snap_config.empty()) o.layout = scene::layout_from_json(load_config(snap_config));
      o.scenario = scene::scenario_from_string(snap_scenario);
      for (const auto& t : snap_targets) {
        const auto v = parse_number_list(t);
        if (v.size() != 3) throw InvalidArgument("--target expects x_cm,y_cm,size_m");
        o.centers.push_back({v[0], v[1]});
        o.sizes.push_back(v[2]);
      }
      o.steps = snap_steps;
      app::cmd_snapshot(o, out_root, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
