#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/rng.hpp"
#include "twr/dataset/dataset.hpp"
#include "twr/nn/adam.hpp"
#include "twr/nn/model.hpp"
#include "twr/nn/network.hpp"

namespace twr::nn {

struct EarlyStop {
  bool enabled = false;
  std::size_t patience = 100;
  bool restore_best = true;
  friend bool operator==(const EarlyStop&, const EarlyStop&) = default;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 30;
  std::size_t max_epochs = 5000;
  EarlyStop early_stop{};
  std::uint64_t seed = 0;
  bool dropout = true;  // false trains with every dropout layer bypassed
  double tol_cm = 5.0;  // hit radius for the accuracy columns of the history

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning rate must be > 0");
    if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
    if (!(tol_cm > 0.0)) throw InvalidArgument("hit tolerance must be > 0");
    if (early_stop.enabled && early_stop.patience < 1) throw InvalidArgument("patience must be >= 1");
  }

  // lr 1e-4 for 5000 epochs with one target, 1e-3 for 1000 epochs with two;
  // batch 30 in both.
  static TrainConfig paper_defaults(int n_targets) {
    TrainConfig c;
    if (n_targets == 2) {
      c.learning_rate = 1e-3;
      c.max_epochs = 1000;
    }
    return c;
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

using History = std::vector<EpochRecord>;

struct TrainResult {
  ModelParams params;
  History history;
  std::size_t best_epoch = 0;  // epoch whose weights `params` holds
  bool stopped_early = false;
};

// Fraction of samples whose every predicted target center lies within tol_cm
// (Euclidean) of the true one. Rows hold x1, y1[, x2, y2]; targets are paired
// positionally. NaN for an empty set.
inline double hit_accuracy(const Matrix& preds, const Matrix& truths, double tol_cm = 5.0) {
  if (!(tol_cm > 0.0)) throw InvalidArgument("hit_accuracy: tolerance must be > 0");
  if (preds.rows != truths.rows || preds.cols != truths.cols) throw InvalidArgument("hit_accuracy: length mismatch");
  if (preds.cols % 2 != 0) throw InvalidArgument("hit_accuracy: rows must hold (x, y) pairs");
  if (preds.rows == 0) return std::numeric_limits<double>::quiet_NaN();
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.rows; ++i) {
    bool all = true;
    for (std::size_t c = 0; c < preds.cols; c += 2) {
      const double dx = preds(i, c) - truths(i, c), dy = preds(i, c + 1) - truths(i, c + 1);
      if (!(std::hypot(dx, dy) <= tol_cm)) all = false;
    }
    hits += all ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(preds.rows);
}

inline constexpr std::size_t kEvalChunk = 256;

// Evaluation-mode forward pass in fixed-size chunks.
inline Matrix predict(const ModelSpec& spec, const ModelParams& params, const Matrix& features) {
  Matrix out(features.rows, spec.output_dim());
  for (std::size_t r0 = 0; r0 < features.rows; r0 += kEvalChunk) {
    const std::size_t n = std::min(kEvalChunk, features.rows - r0);
    Matrix chunk(n, features.cols);
    std::copy(features.row(r0), features.row(r0) + n * features.cols, chunk.data.begin());
    const Matrix y = forward(spec, params, chunk, false, 0);
    std::copy(y.data.begin(), y.data.end(), out.row(r0));
  }
  return out;
}

struct Metrics {
  double loss = std::numeric_limits<double>::quiet_NaN();
  double acc = std::numeric_limits<double>::quiet_NaN();
};

inline Metrics evaluate(const ModelSpec& spec, const ModelParams& params, const Matrix& x, const Matrix& y,
                        double tol_cm = 5.0) {
  if (x.rows == 0) return {};
  const Matrix p = predict(spec, params, x);
  return {msle(y, p), hit_accuracy(p, y, tol_cm)};
}

// Rows of a dataset split as matrices, features passed through the stored
// standardizer when one is present.
struct SplitData {
  Matrix x;
  Matrix y;
};

inline SplitData split_matrices(const dataset::Dataset& ds, dataset::Split which, bool standardize = true) {
  const auto idx = ds.indices(which);
  SplitData d{Matrix(idx.size(), ds.feature_dim()), Matrix(idx.size(), ds.label_dim())};
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& s = ds.samples[idx[r]];
    const auto f = standardize && ds.standardization ? ds.standardization->apply(s.features) : s.features;
    std::copy(f.begin(), f.end(), d.x.row(r));
    std::copy(s.labels.begin(), s.labels.end(), d.y.row(r));
  }
  return d;
}

inline constexpr std::uint64_t kInitStream = 0;
inline constexpr std::uint64_t kShuffleStream = 1;
inline constexpr std::uint64_t kDropoutStream = 2;

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch Adam on MSLE. Each epoch reshuffles the training rows from
// (seed, epoch), then records evaluation-mode loss and hit-accuracy on the
// training and validation rows.
inline TrainResult train(const ModelSpec& spec, const SplitData& tr, const SplitData& val, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  spec.validate();
  cfg.validate();
  if (tr.x.rows == 0) throw TooFewSamples("train: empty training split");
  if (tr.x.cols != spec.input_dim || tr.y.cols != spec.output_dim() || tr.y.rows != tr.x.rows) {
    throw InvalidArgument("train: training data does not match the model shape");
  }
  if (val.x.rows != val.y.rows || (val.x.rows > 0 && (val.x.cols != tr.x.cols || val.y.cols != tr.y.cols))) {
    throw InvalidArgument("train: validation data does not match the training data");
  }
  if (cfg.early_stop.enabled && val.x.rows == 0) throw InvalidArgument("train: early stopping needs validation rows");

  ModelSpec run_spec = spec;
  if (!cfg.dropout) {
    for (auto& l : run_spec.layers) {
      if (auto* d = std::get_if<Dropout>(&l)) d->rate = 0.0;
    }
  }
  TrainResult res;
  res.params = init_params(spec, derive_seed(cfg.seed, kInitStream));
  AdamState adam = make_adam_state(res.params);
  std::optional<ModelParams> best;
  double best_loss = std::numeric_limits<double>::infinity();

  const std::size_t n = tr.x.rows, d_in = tr.x.cols, d_out = tr.y.cols;
  std::vector<std::size_t> order(n);
  ForwardCache cache;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t k = 0; k < n; ++k) order[k] = k;
    Rng rng(derive_seed(cfg.seed, kShuffleStream, epoch));
    rng.shuffle(std::span(order));
    for (std::size_t b0 = 0, batch = 0; b0 < n; b0 += cfg.batch_size, ++batch) {
      const std::size_t m = std::min(cfg.batch_size, n - b0);
      Matrix xb(m, d_in), yb(m, d_out);
      for (std::size_t r = 0; r < m; ++r) {
        std::copy(tr.x.row(order[b0 + r]), tr.x.row(order[b0 + r]) + d_in, xb.row(r));
        std::copy(tr.y.row(order[b0 + r]), tr.y.row(order[b0 + r]) + d_out, yb.row(r));
      }
      const Matrix out = forward(run_spec, res.params, xb, true,
                                 derive_seed(derive_seed(cfg.seed, kDropoutStream), epoch, batch), &cache);
      if (!std::isfinite(msle(yb, out))) throw TrainingDiverged(epoch, "train: non-finite batch loss");
      adam_step(res.params, backward(run_spec, res.params, cache, yb), adam, cfg.learning_rate);
    }
    EpochRecord rec{epoch, 0, 0, 0, 0};
    const Metrics mt = evaluate(spec, res.params, tr.x, tr.y, cfg.tol_cm);
    const Metrics mv = evaluate(spec, res.params, val.x, val.y, cfg.tol_cm);
    rec.train_loss = mt.loss;
    rec.train_acc = mt.acc;
    rec.val_loss = mv.loss;
    rec.val_acc = mv.acc;
    if (!std::isfinite(rec.train_loss) || (val.x.rows > 0 && !std::isfinite(rec.val_loss))) {
      throw TrainingDiverged(epoch, "train: non-finite epoch loss");
    }
    res.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (cfg.early_stop.enabled) {
      if (rec.val_loss < best_loss) {
        best_loss = rec.val_loss;
        res.best_epoch = epoch;
        if (cfg.early_stop.restore_best) best = res.params;
      } else if (epoch - res.best_epoch >= cfg.early_stop.patience) {
        res.stopped_early = true;
        break;
      }
    }
  }
  if (cfg.early_stop.enabled && cfg.early_stop.restore_best && best) {
    res.params = std::move(*best);
  } else {
    res.best_epoch = res.history.size();
  }
  return res;
}

inline TrainResult train(const ModelSpec& spec, const dataset::Dataset& ds, const TrainConfig& cfg,
                         const EpochCallback& on_epoch = {}) {
  if (!ds.has_splits()) throw InvalidState("train: dataset has no split assignment");
  if (!ds.standardization) throw InvalidState("train: dataset is not standardized");
  return train(spec, split_matrices(ds, dataset::Split::train), split_matrices(ds, dataset::Split::val), cfg,
               on_epoch);
}

}  // namespace twr::nn
