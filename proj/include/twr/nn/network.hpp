#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <variant>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/rng.hpp"
#include "twr/nn/matrix.hpp"
#include "twr/nn/model.hpp"

namespace twr::nn {

// Activations kept by a forward pass for the matching backward pass.
// acts[k] is the input of layer k and acts.back() the network output.
struct ForwardCache {
  std::vector<Matrix> acts;
  std::vector<Matrix> masks;  // per layer; empty unless a training-mode dropout
  std::uint64_t params_version = 0;
  const ModelParams* params = nullptr;
  bool valid = false;
};

struct Gradients {
  std::vector<DenseParams> dense;
};

inline Gradients zero_gradients(const ModelParams& p) {
  Gradients g;
  for (const auto& d : p.dense) g.dense.push_back({Matrix(d.w.rows, d.w.cols), std::vector<double>(d.b.size(), 0.0)});
  return g;
}

namespace detail {

// y = x W^T + b for a batch x (B x in) and W (out x in).
inline Matrix dense_forward(const Matrix& x, const DenseParams& p) {
  Matrix y(x.rows, p.w.rows);
  for (std::size_t i = 0; i < y.rows; ++i) std::copy(p.b.begin(), p.b.end(), y.row(i));
  const Matrix wt = p.w.transposed();
  gemm_accumulate(x, wt, y);
  return y;
}

inline void relu_inplace(Matrix& m) {
  for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

// Inverted dropout: kept units are scaled by 1/(1-rate) so the expectation of
// every unit matches the evaluation pass.
inline Matrix dropout_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t seed) {
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  Rng rng(seed);
  for (double& v : m.data) v = rng.uniform() >= rate ? keep : 0.0;
  return m;
}

}  // namespace detail

// Runs the network on a batch (rows = samples). Dropout is applied only when
// `training` is set, with one mask stream per layer derived from `seed`.
inline Matrix forward(const ModelSpec& spec, const ModelParams& params, const Matrix& batch, bool training,
                      std::uint64_t seed, ForwardCache* cache = nullptr) {
  if (batch.cols != spec.input_dim) {
    throw InvalidArgument("forward: batch width " + std::to_string(batch.cols) + " != input_dim " +
                          std::to_string(spec.input_dim));
  }
  if (!params.matches(spec)) throw InvalidArgument("forward: parameters do not match the model");
  if (cache) {
    cache->acts.clear();
    cache->masks.assign(spec.layers.size(), Matrix{});
    cache->acts.push_back(batch);
  }
  Matrix x = batch;
  std::size_t dense_index = 0;
  for (std::size_t k = 0; k < spec.layers.size(); ++k) {
    if (const auto* d = std::get_if<Dense>(&spec.layers[k])) {
      x = detail::dense_forward(x, params.dense[dense_index++]);
      if (d->activation == Activation::relu) detail::relu_inplace(x);
    } else {
      const double rate = std::get<Dropout>(spec.layers[k]).rate;
      if (training && rate > 0.0) {
        Matrix mask = detail::dropout_mask(x.rows, x.cols, rate, derive_seed(seed, k));
        for (std::size_t e = 0; e < x.data.size(); ++e) x.data[e] *= mask.data[e];
        if (cache) cache->masks[k] = std::move(mask);
      }
    }
    if (cache) cache->acts.push_back(x);
  }
  if (cache) {
    cache->params_version = params.version;
    cache->params = &params;
    cache->valid = true;
  }
  return x;
}

inline constexpr double kMsleClamp = -1.0 + 1e-7;

inline void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols) throw InvalidArgument(std::string(what) + ": shape mismatch");
}

// Mean over all elements of (log(1 + y) - log(1 + max(p, -1 + 1e-7)))^2.
inline double msle(const Matrix& truth, const Matrix& pred) {
  check_same_shape(truth, pred, "msle");
  if (truth.data.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t e = 0; e < truth.data.size(); ++e) {
    const double r = std::log1p(truth.data[e]) - std::log1p(std::max(pred.data[e], kMsleClamp));
    s += r * r;
  }
  return s / static_cast<double>(truth.data.size());
}

// d msle / d pred; zero where the clamp is active.
inline Matrix msle_gradient(const Matrix& truth, const Matrix& pred) {
  check_same_shape(truth, pred, "msle_gradient");
  Matrix g(pred.rows, pred.cols);
  const double n = static_cast<double>(std::max<std::size_t>(truth.data.size(), 1));
  for (std::size_t e = 0; e < truth.data.size(); ++e) {
    const double p = pred.data[e];
    if (p < kMsleClamp) continue;
    const double r = std::log1p(truth.data[e]) - std::log1p(p);
    g.data[e] = -2.0 * r / ((1.0 + p) * n);
  }
  return g;
}

// Gradients of msle(truth, forward(...)) for the batch held in `cache`.
inline Gradients backward(const ModelSpec& spec, const ModelParams& params, const ForwardCache& cache,
                          const Matrix& truth) {
  if (!cache.valid || cache.params != &params || cache.params_version != params.version ||
      cache.acts.size() != spec.layers.size() + 1) {
    throw InvalidState("backward: forward cache is stale or belongs to other parameters");
  }
  Matrix delta = msle_gradient(truth, cache.acts.back());
  Gradients g = zero_gradients(params);
  std::size_t dense_index = params.dense.size();
  for (std::size_t k = spec.layers.size(); k-- > 0;) {
    if (const auto* d = std::get_if<Dense>(&spec.layers[k])) {
      const auto& p = params.dense[--dense_index];
      if (d->activation == Activation::relu) {
        const Matrix& out = cache.acts[k + 1];
        for (std::size_t e = 0; e < delta.data.size(); ++e) {
          if (!(out.data[e] > 0.0)) delta.data[e] = 0.0;
        }
      }
      const Matrix& x = cache.acts[k];
      auto& gd = g.dense[dense_index];
      const Matrix dt = delta.transposed();
      gemm_accumulate(dt, x, gd.w);
      for (std::size_t i = 0; i < delta.rows; ++i) {
        const double* row = delta.row(i);
        for (std::size_t j = 0; j < delta.cols; ++j) gd.b[j] += row[j];
      }
      if (dense_index > 0) {
        Matrix dx(delta.rows, p.w.cols);
        gemm_accumulate(delta, p.w, dx);
        delta = std::move(dx);
      }
    } else if (!cache.masks[k].data.empty()) {
      const Matrix& m = cache.masks[k];
      for (std::size_t e = 0; e < delta.data.size(); ++e) delta.data[e] *= m.data[e];
    }
  }
  return g;
}

}  // namespace twr::nn
