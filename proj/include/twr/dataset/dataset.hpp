#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/hash.hpp"
#include "twr/core/rng.hpp"
#include "twr/dataset/features.hpp"
#include "twr/scene/wall.hpp"

namespace twr::dataset {

enum class Split : std::uint8_t { train = 0, test = 1, val = 2, unassigned = 255 };

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::test: return "test";
    case Split::val: return "val";
    case Split::unassigned: return "unassigned";
  }
  return "unknown";
}

inline Split split_from_string(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  if (s == "val" || s == "validation") return Split::val;
  throw InvalidArgument("unknown split '" + std::string(s) + "'");
}

struct Sample {
  FeatureVector features;
  std::vector<double> labels;  // x1, y1[, x2, y2] in cm, canonical pair order
  scene::Scenario scenario = scene::Scenario::homogeneous;
  std::vector<double> sizes;   // meters, one per target
  std::uint64_t sim_seed = 0;

  std::size_t n_targets() const noexcept { return sizes.size(); }
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  static constexpr double kStdFloor = 1e-12;

  std::size_t dim() const noexcept { return mean.size(); }

  FeatureVector apply(std::span<const double> x) const {
    if (x.size() != dim()) throw InvalidArgument("Standardizer::apply: dimension mismatch");
    FeatureVector out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = (x[k] - mean[k]) / stddev[k];
    return out;
  }

  FeatureVector invert(std::span<const double> z) const {
    if (z.size() != dim()) throw InvalidArgument("Standardizer::invert: dimension mismatch");
    FeatureVector out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] * stddev[k] + mean[k];
    return out;
  }

  // Content hash over the raw statistics, used to pair checkpoints with datasets.
  std::uint64_t hash() const {
    std::vector<std::uint8_t> bytes((mean.size() + stddev.size()) * sizeof(double));
    std::memcpy(bytes.data(), mean.data(), mean.size() * sizeof(double));
    std::memcpy(bytes.data() + mean.size() * sizeof(double), stddev.data(), stddev.size() * sizeof(double));
    return hash64(bytes);
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

// Per-dimension mean and population standard deviation.
inline Standardizer fit_standardizer(std::span<const FeatureVector* const> train) {
  if (train.size() < 2) throw TooFewSamples("fit_standardizer: need at least two training samples");
  const std::size_t d = train.front()->size();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.stddev.assign(d, 0.0);
  for (const auto* f : train) {
    if (f->size() != d) throw InvalidArgument("fit_standardizer: inconsistent feature dimensions");
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += (*f)[k];
  }
  const auto n = static_cast<double>(train.size());
  for (double& m : s.mean) m /= n;
  for (const auto* f : train) {
    for (std::size_t k = 0; k < d; ++k) {
      const double c = (*f)[k] - s.mean[k];
      s.stddev[k] += c * c;
    }
  }
  for (double& v : s.stddev) v = std::max(std::sqrt(v / n), Standardizer::kStdFloor);
  return s;
}

inline Standardizer fit_standardizer(std::span<const FeatureVector> train) {
  std::vector<const FeatureVector*> ptrs;
  for (const auto& f : train) ptrs.push_back(&f);
  return fit_standardizer(std::span<const FeatureVector* const>(ptrs));
}

struct DatasetMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t grid_hash = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t split_seed = 0;
  std::string config_json;  // fully resolved generation config
  friend bool operator==(const DatasetMeta&, const DatasetMeta&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  DatasetMeta meta;
  std::vector<Split> split_assignment;  // empty until split_dataset
  std::optional<Standardizer> standardization;

  std::size_t size() const noexcept { return samples.size(); }
  bool has_splits() const noexcept { return split_assignment.size() == samples.size() && !samples.empty(); }
  std::size_t feature_dim() const noexcept { return samples.empty() ? 0 : samples.front().features.size(); }
  std::size_t label_dim() const noexcept { return samples.empty() ? 0 : samples.front().labels.size(); }

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < split_assignment.size(); ++k) {
      if (split_assignment[k] == s) out.push_back(k);
    }
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitFractions {
  double train = 0.7, test = 0.2, val = 0.1;
};

// Seeded shuffle; test = floor(f_test n), val = floor(f_val n), the rest train.
inline Dataset split_dataset(Dataset ds, SplitFractions fr, std::uint64_t seed) {
  if (std::abs(fr.train + fr.test + fr.val - 1.0) > 1e-9 || fr.train < 0 || fr.test < 0 || fr.val < 0) {
    throw InvalidArgument("split_dataset: fractions must be non-negative and sum to 1");
  }
  const std::size_t n = ds.size();
  if (n < 3) throw TooFewSamples("split_dataset: need at least three samples");
  const auto n_test = static_cast<std::size_t>(std::floor(fr.test * static_cast<double>(n) + 1e-9));
  const auto n_val = static_cast<std::size_t>(std::floor(fr.val * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  Rng rng(seed);
  rng.shuffle(std::span(order));
  ds.split_assignment.assign(n, Split::train);
  for (std::size_t k = 0; k < n_test; ++k) ds.split_assignment[order[k]] = Split::test;
  for (std::size_t k = n_test; k < n_test + n_val; ++k) ds.split_assignment[order[k]] = Split::val;
  ds.meta.split_seed = seed;
  return ds;
}

inline Dataset split_dataset(Dataset ds, std::uint64_t seed) { return split_dataset(std::move(ds), {}, seed); }

// Fits on the train split and stores the statistics on the dataset.
inline Standardizer fit_train_standardizer(Dataset& ds) {
  if (!ds.has_splits()) throw InvalidState("fit_train_standardizer: dataset has no split assignment");
  std::vector<const FeatureVector*> train;
  for (std::size_t k : ds.indices(Split::train)) train.push_back(&ds.samples[k].features);
  ds.standardization = fit_standardizer(std::span<const FeatureVector* const>(train));
  return *ds.standardization;
}

// Replaces every sample's features with an AWGN-corrupted copy. Per-sample
// seeds come from (seed, sample index).
inline Dataset with_awgn(Dataset ds, double snr_db, std::uint64_t seed) {
  for (std::size_t k = 0; k < ds.samples.size(); ++k) {
    ds.samples[k].features = add_awgn(ds.samples[k].features, snr_db, derive_seed(seed, k));
  }
  ds.standardization.reset();
  return ds;
}

}  // namespace twr::dataset
