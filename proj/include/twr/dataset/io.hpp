#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "twr/core/binary_io.hpp"
#include "twr/core/error.hpp"
#include "twr/dataset/dataset.hpp"

namespace twr::dataset {

// Container layout (all little-endian):
//   char[8]  magic "TWRDSET\0"
//   u32      version (1)
//   u32      feature_dim
//   u32      label_dim
//   u32      reserved (0)
//   u64      sample_count
//   u64      config_hash, grid_hash, master_seed, split_seed
//   u32+str  resolved generation config (JSON)
//   per sample:
//     u8 scenario, u8 n_targets, u8 split, u8 reserved, u32 reserved,
//     u64 sim_seed, f64 labels[label_dim], f64 sizes[n_targets], f64 features[feature_dim]
//   u8       has_standardizer; if 1: f64 mean[feature_dim], f64 std[feature_dim]
//   u32      CRC32 of all preceding bytes
inline constexpr char kDatasetMagic[8] = {'T', 'W', 'R', 'D', 'S', 'E', 'T', '\0'};
inline constexpr std::uint32_t kDatasetVersion = 1;

inline std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  const std::size_t fdim = ds.feature_dim(), ldim = ds.label_dim();
  for (const auto& s : ds.samples) {
    if (s.features.size() != fdim || s.labels.size() != ldim || 2 * s.sizes.size() != ldim) {
      throw InvalidArgument("save_dataset: samples have inconsistent shapes");
    }
  }
  ByteWriter w;
  w.put_bytes(std::string_view(kDatasetMagic, 8));
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(fdim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(ldim));
  w.put<std::uint32_t>(0);
  w.put<std::uint64_t>(ds.samples.size());
  w.put<std::uint64_t>(ds.meta.config_hash);
  w.put<std::uint64_t>(ds.meta.grid_hash);
  w.put<std::uint64_t>(ds.meta.master_seed);
  w.put<std::uint64_t>(ds.meta.split_seed);
  w.put_string(ds.meta.config_json);
  const bool split = ds.has_splits();
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    const auto& s = ds.samples[k];
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.scenario));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.sizes.size()));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(split ? ds.split_assignment[k] : Split::unassigned));
    w.put<std::uint8_t>(0);
    w.put<std::uint32_t>(0);
    w.put<std::uint64_t>(s.sim_seed);
    w.put_doubles(s.labels);
    w.put_doubles(s.sizes);
    w.put_doubles(s.features);
  }
  w.put<std::uint8_t>(ds.standardization ? 1 : 0);
  if (ds.standardization) {
    if (ds.standardization->dim() != fdim) throw InvalidArgument("save_dataset: standardizer dimension mismatch");
    w.put_doubles(ds.standardization->mean);
    w.put_doubles(ds.standardization->stddev);
  }
  w.put_checksum();
  return w.bytes();
}

inline Dataset decode_dataset(std::span<const std::uint8_t> file, const std::string& what = "dataset") {
  const auto payload = verify_checksum(file, what);
  ByteReader r(payload, what);
  if (r.get_bytes(8) != std::string_view(kDatasetMagic, 8)) throw LoadError(what + ": not a dataset file");
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw LoadError(what + ": unsupported version " + std::to_string(version) + " (expected " +
                    std::to_string(kDatasetVersion) + ")");
  }
  const auto fdim = r.get<std::uint32_t>();
  const auto ldim = r.get<std::uint32_t>();
  r.get<std::uint32_t>();
  const auto n = r.get<std::uint64_t>();
  Dataset ds;
  ds.meta.config_hash = r.get<std::uint64_t>();
  ds.meta.grid_hash = r.get<std::uint64_t>();
  ds.meta.master_seed = r.get<std::uint64_t>();
  ds.meta.split_seed = r.get<std::uint64_t>();
  ds.meta.config_json = r.get_string();
  if (n > r.remaining()) throw LoadError(what + ": sample count exceeds file size");
  ds.samples.resize(n);
  std::vector<Split> splits(n);
  bool any_split = false;
  for (std::size_t k = 0; k < n; ++k) {
    auto& s = ds.samples[k];
    const auto sc = r.get<std::uint8_t>();
    if (sc >= scene::kAllScenarios.size()) throw LoadError(what + ": bad scenario code");
    s.scenario = static_cast<scene::Scenario>(sc);
    const auto nt = r.get<std::uint8_t>();
    if (2u * nt != ldim) throw LoadError(what + ": target count does not match label width");
    const auto sp = r.get<std::uint8_t>();
    if (sp > 2 && sp != 255) throw LoadError(what + ": bad split code");
    splits[k] = static_cast<Split>(sp);
    any_split = any_split || sp != 255;
    r.get<std::uint8_t>();
    r.get<std::uint32_t>();
    s.sim_seed = r.get<std::uint64_t>();
    s.labels.resize(ldim);
    r.get_doubles(s.labels);
    s.sizes.resize(nt);
    r.get_doubles(s.sizes);
    s.features.resize(fdim);
    r.get_doubles(s.features);
  }
  if (any_split) {
    for (auto sp : splits) {
      if (sp == Split::unassigned) throw LoadError(what + ": partial split assignment");
    }
    ds.split_assignment = std::move(splits);
  }
  if (r.get<std::uint8_t>()) {
    Standardizer st;
    st.mean.resize(fdim);
    st.stddev.resize(fdim);
    r.get_doubles(st.mean);
    r.get_doubles(st.stddev);
    ds.standardization = std::move(st);
  }
  if (r.remaining() != 0) throw LoadError(what + ": trailing bytes after payload");
  return ds;
}

// Writes to a sibling temporary and renames it into place, so a failed write
// never leaves a truncated file under the final name.
inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("write failed for " + path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_bytes(path, encode_dataset(ds));
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_bytes(path), path.string());
}

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// One row per sample: scenario, n_targets, x1, y1[, x2, y2], size1[, size2], f0..f{d-1}.
// Numbers use shortest round-trip formatting so import is lossless.
inline void export_csv(const Dataset& ds, std::ostream& os) {
  const std::size_t nt = ds.label_dim() / 2, fdim = ds.feature_dim();
  os << "scenario,n_targets";
  for (std::size_t t = 1; t <= nt; ++t) os << ",x" << t << ",y" << t;
  for (std::size_t t = 1; t <= nt; ++t) os << ",size" << t;
  for (std::size_t k = 0; k < fdim; ++k) os << ",f" << k;
  os << '\n';
  for (const auto& s : ds.samples) {
    os << scene::to_string(s.scenario) << ',' << s.n_targets();
    for (double v : s.labels) os << ',' << format_double(v);
    for (double v : s.sizes) os << ',' << format_double(v);
    for (double v : s.features) os << ',' << format_double(v);
    os << '\n';
  }
}

inline Dataset import_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw LoadError("csv: missing header");
  Dataset ds;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) throw LoadError("csv line " + std::to_string(lineno) + ": too few columns");
    Sample s;
    s.scenario = scene::scenario_from_string(cells[0]);
    const std::size_t nt = std::stoul(cells[1]);
    if (nt < 1 || nt > 2 || cells.size() < 2 + 3 * nt) {
      throw LoadError("csv line " + std::to_string(lineno) + ": bad target count");
    }
    std::size_t c = 2;
    const auto num = [&](std::size_t i) {
      double v = 0.0;
      const auto& t = cells[i];
      const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      if (res.ec != std::errc{}) throw LoadError("csv line " + std::to_string(lineno) + ": bad number '" + t + "'");
      return v;
    };
    for (std::size_t k = 0; k < 2 * nt; ++k) s.labels.push_back(num(c++));
    for (std::size_t k = 0; k < nt; ++k) s.sizes.push_back(num(c++));
    for (; c < cells.size(); ++c) s.features.push_back(num(c));
    if (!ds.samples.empty() && (s.features.size() != ds.feature_dim() || s.labels.size() != ds.label_dim())) {
      throw LoadError("csv line " + std::to_string(lineno) + ": inconsistent row width");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace twr::dataset
