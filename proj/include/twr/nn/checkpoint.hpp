#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"
#include "twr/core/binary_io.hpp"
#include "twr/core/error.hpp"
#include "twr/dataset/dataset.hpp"
#include "twr/dataset/io.hpp"
#include "twr/nn/model.hpp"
#include "twr/nn/train.hpp"

namespace twr::nn {

// A trained network together with the feature statistics it was trained on.
struct TrainedModel {
  ModelSpec spec;
  ModelParams params;
  dataset::Standardizer standardizer;
  nlohmann::json meta = nlohmann::json::object();  // split seed, dataset hash, training config, ...

  // Raw (unstandardized) features, one sample per row, to coordinates in cm.
  Matrix predict_raw(const Matrix& raw) const {
    if (raw.cols != standardizer.dim()) throw InvalidArgument("predict: feature width does not match the model");
    Matrix z(raw.rows, raw.cols);
    for (std::size_t i = 0; i < raw.rows; ++i) {
      const auto row = standardizer.apply(raw.row_span(i));
      std::copy(row.begin(), row.end(), z.row(i));
    }
    return predict(spec, params, z);
  }
};

// Checkpoint layout (little-endian):
//   char[8]  "TWRMODEL"
//   u32      version (1)
//   u32      input_dim
//   u32      layer count, then per layer: u8 kind (0 dense, 1 dropout),
//            u8 activation (0 relu, 1 linear), u16 reserved, u32 width, f64 dropout rate
//   u32+str  metadata JSON
//   per dense layer in order: f64 W[out * in] (row-major, out x in), f64 b[out]
//   u32      standardizer dim, f64 mean[dim], f64 std[dim]
//   u32      CRC32 of everything above
inline constexpr char kModelMagic[8] = {'T', 'W', 'R', 'M', 'O', 'D', 'E', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

inline std::vector<std::uint8_t> encode_model(const TrainedModel& m) {
  m.spec.validate();
  if (!m.params.matches(m.spec)) throw InvalidArgument("save_model: parameters do not match the model");
  if (m.standardizer.dim() != m.spec.input_dim) throw InvalidArgument("save_model: standardizer width mismatch");
  ByteWriter w;
  w.put_bytes(std::string_view(kModelMagic, 8));
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.spec.input_dim));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.spec.layers.size()));
  for (const auto& l : m.spec.layers) {
    if (const auto* d = std::get_if<Dense>(&l)) {
      w.put<std::uint8_t>(0);
      w.put<std::uint8_t>(d->activation == Activation::relu ? 0 : 1);
      w.put<std::uint16_t>(0);
      w.put<std::uint32_t>(static_cast<std::uint32_t>(d->width));
      w.put<double>(0.0);
    } else {
      w.put<std::uint8_t>(1);
      w.put<std::uint8_t>(0);
      w.put<std::uint16_t>(0);
      w.put<std::uint32_t>(0);
      w.put<double>(std::get<Dropout>(l).rate);
    }
  }
  w.put_string(m.meta.dump());
  for (const auto& d : m.params.dense) {
    w.put_doubles(d.w.data);
    w.put_doubles(d.b);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.standardizer.dim()));
  w.put_doubles(m.standardizer.mean);
  w.put_doubles(m.standardizer.stddev);
  w.put_checksum();
  return w.bytes();
}

inline TrainedModel decode_model(std::span<const std::uint8_t> file, const std::string& what = "checkpoint") {
  const auto payload = verify_checksum(file, what);
  ByteReader r(payload, what);
  if (r.get_bytes(8) != std::string_view(kModelMagic, 8)) throw LoadError(what + ": not a model checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) throw LoadError(what + ": unsupported version " + std::to_string(version));
  TrainedModel m;
  m.spec.input_dim = r.get<std::uint32_t>();
  const auto n_layers = r.get<std::uint32_t>();
  if (n_layers > r.remaining() / 16) throw LoadError(what + ": layer count exceeds file size");
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    const auto kind = r.get<std::uint8_t>();
    const auto act = r.get<std::uint8_t>();
    r.get<std::uint16_t>();
    const auto width = r.get<std::uint32_t>();
    const auto rate = r.get<double>();
    if (kind == 0 && act <= 1) {
      m.spec.layers.emplace_back(Dense{width, act == 0 ? Activation::relu : Activation::linear});
    } else if (kind == 1) {
      m.spec.layers.emplace_back(Dropout{rate});
    } else {
      throw LoadError(what + ": bad layer record");
    }
  }
  try {
    m.spec.validate();
  } catch (const InvalidArgument& e) {
    throw LoadError(what + ": " + e.what());
  }
  try {
    m.meta = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::parse_error&) {
    throw LoadError(what + ": malformed metadata");
  }
  m.params = zero_params(m.spec);
  for (auto& d : m.params.dense) {
    r.get_doubles(d.w.data);
    r.get_doubles(d.b);
  }
  const auto dim = r.get<std::uint32_t>();
  if (dim != m.spec.input_dim) throw LoadError(what + ": standardizer width does not match the model");
  m.standardizer.mean.resize(dim);
  m.standardizer.stddev.resize(dim);
  r.get_doubles(m.standardizer.mean);
  r.get_doubles(m.standardizer.stddev);
  if (r.remaining() != 0) throw LoadError(what + ": trailing bytes after payload");
  if (!m.params.all_finite()) throw LoadError(what + ": non-finite weights");
  return m;
}

inline void save_model(const TrainedModel& m, const std::filesystem::path& path) {
  dataset::write_bytes(path, encode_model(m));
}

inline TrainedModel load_model(const std::filesystem::path& path) {
  return decode_model(dataset::read_bytes(path), path.string());
}

}  // namespace twr::nn
