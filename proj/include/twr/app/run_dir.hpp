#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "json.hpp"
#include "twr/core/error.hpp"
#include "twr/core/hash.hpp"
#include "twr/dataset/io.hpp"

namespace twr::app {

namespace fs = std::filesystem;

inline constexpr const char* kOutputRootEnv = "TWR_OUTPUT_ROOT";
inline constexpr const char* kManifestName = "manifest.json";

inline fs::path default_output_root() {
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "runs";
}

// Collects the outputs of one command invocation in a directory of its own.
// The directory name is derived from the resolved configuration, so reruns of
// the same command land next to each other as <name>, <name>-2, ...
class RunDir {
 public:
  RunDir(const fs::path& root, const std::string& command, const nlohmann::json& config)
      : command_(command), config_(config) {
    const std::string stem = command + "-" + to_hex(hash64(config.dump())).substr(0, 12);
    fs::create_directories(root);
    path_ = root / stem;
    for (int k = 2; fs::exists(path_); ++k) path_ = root / (stem + "-" + std::to_string(k));
    fs::create_directory(path_);
  }

  const fs::path& path() const noexcept { return path_; }
  fs::path file(const std::string& name) const { return path_ / name; }

  void add_input(const std::string& role, const fs::path& p) { add_input(role, p, file_content_hash(p.string())); }
  void add_input(const std::string& role, const fs::path& p, const std::string& sha256) {
    inputs_[role] = {{"path", p.string()}, {"sha256", sha256}};
  }

  void write_text(const std::string& name, const std::string& content) {
    const std::vector<std::uint8_t> bytes(content.begin(), content.end());
    dataset::write_bytes(file(name), bytes);
    record_output(name);
  }

  void record_output(const std::string& name) { outputs_[name] = file_content_hash(file(name).string()); }

  void set_result(nlohmann::json r) { result_ = std::move(r); }

  // Written last; a run without a manifest did not complete.
  void write_manifest(const std::string& status = "complete") {
    nlohmann::json m = {{"command", command_}, {"status", status}, {"config", config_}, {"inputs", inputs_},
                        {"outputs", outputs_}};
    if (!result_.is_null()) m["result"] = result_;
    const std::string s = m.dump(2) + "\n";
    dataset::write_bytes(file(kManifestName), std::vector<std::uint8_t>(s.begin(), s.end()));
  }

 private:
  std::string command_;
  nlohmann::json config_;
  fs::path path_;
  std::map<std::string, nlohmann::json> inputs_;
  std::map<std::string, std::string> outputs_;
  nlohmann::json result_;
};

inline nlohmann::json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw LoadError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw LoadError(p.string() + ": " + e.what());
  }
}

inline void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p) || fs::is_directory(p)) throw LoadError(what + " not found: " + p.string());
}

}  // namespace twr::app
