#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/core/rng.hpp"
#include "twr/nn/matrix.hpp"

namespace twr::nn {

enum class Activation : std::uint8_t { relu = 0, linear = 1 };

struct Dense {
  std::size_t width = 0;
  Activation activation = Activation::relu;
  friend bool operator==(const Dense&, const Dense&) = default;
};

struct Dropout {
  double rate = 0.2;
  friend bool operator==(const Dropout&, const Dropout&) = default;
};

using Layer = std::variant<Dense, Dropout>;

struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<Layer> layers;

  std::size_t output_dim() const {
    std::size_t w = input_dim;
    for (const auto& l : layers) {
      if (const auto* d = std::get_if<Dense>(&l)) w = d->width;
    }
    return w;
  }

  // (fan_in, fan_out) of every dense layer in order.
  std::vector<std::pair<std::size_t, std::size_t>> dense_shapes() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t w = input_dim;
    for (const auto& l : layers) {
      if (const auto* d = std::get_if<Dense>(&l)) {
        out.emplace_back(w, d->width);
        w = d->width;
      }
    }
    return out;
  }

  std::vector<std::size_t> dense_parameter_counts() const {
    std::vector<std::size_t> out;
    for (auto [in, o] : dense_shapes()) out.push_back(in * o + o);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto c : dense_parameter_counts()) n += c;
    return n;
  }

  void validate() const {
    if (input_dim == 0) throw InvalidArgument("ModelSpec: input_dim must be positive");
    if (layers.empty() || !std::holds_alternative<Dense>(layers.back())) {
      throw InvalidArgument("ModelSpec: last layer must be dense");
    }
    if (std::get<Dense>(layers.back()).activation != Activation::linear) {
      throw InvalidArgument("ModelSpec: output layer must be linear");
    }
    for (const auto& l : layers) {
      if (const auto* d = std::get_if<Dense>(&l); d && d->width == 0) {
        throw InvalidArgument("ModelSpec: dense width must be positive");
      }
      if (const auto* p = std::get_if<Dropout>(&l); p && !(p->rate >= 0.0 && p->rate < 1.0)) {
        throw InvalidArgument("ModelSpec: dropout rate must lie in [0, 1)");
      }
    }
  }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

inline constexpr std::size_t kInputDim = 285;
inline constexpr double kDefaultDropout = 0.0;

// dense 284 / 300 / 300 / 300 (relu, each followed by dropout), dense 2 linear.
inline ModelSpec build_single_target_model(double dropout = kDefaultDropout, std::size_t input_dim = kInputDim) {
  ModelSpec s{input_dim, {}};
  for (std::size_t w : {284u, 300u, 300u, 300u}) {
    s.layers.emplace_back(Dense{w, Activation::relu});
    s.layers.emplace_back(Dropout{dropout});
  }
  s.layers.emplace_back(Dense{2, Activation::linear});
  return s;
}

// dense 285 / 300 x 4 (relu, each followed by dropout), dense 300 relu,
// dense 4 linear.
inline ModelSpec build_two_target_model(double dropout = kDefaultDropout, std::size_t input_dim = kInputDim) {
  ModelSpec s{input_dim, {}};
  for (std::size_t w : {285u, 300u, 300u, 300u, 300u}) {
    s.layers.emplace_back(Dense{w, Activation::relu});
    s.layers.emplace_back(Dropout{dropout});
  }
  s.layers.emplace_back(Dense{300, Activation::relu});
  s.layers.emplace_back(Dense{4, Activation::linear});
  return s;
}

struct DenseParams {
  Matrix w;  // out x in
  std::vector<double> b;
  friend bool operator==(const DenseParams&, const DenseParams&) = default;
};

struct ModelParams {
  std::vector<DenseParams> dense;
  // Bumped by every in-place update so stale forward caches can be detected.
  std::uint64_t version = 0;

  bool matches(const ModelSpec& spec) const {
    const auto shapes = spec.dense_shapes();
    if (shapes.size() != dense.size()) return false;
    for (std::size_t k = 0; k < shapes.size(); ++k) {
      if (dense[k].w.rows != shapes[k].second || dense[k].w.cols != shapes[k].first ||
          dense[k].b.size() != shapes[k].second) {
        return false;
      }
    }
    return true;
  }

  bool all_finite() const {
    for (const auto& d : dense) {
      for (double v : d.w.data) {
        if (!std::isfinite(v)) return false;
      }
      for (double v : d.b) {
        if (!std::isfinite(v)) return false;
      }
    }
    return true;
  }

  // Weights and biases only; the version counter is bookkeeping.
  friend bool operator==(const ModelParams& a, const ModelParams& b) { return a.dense == b.dense; }
};

inline ModelParams zero_params(const ModelSpec& spec) {
  ModelParams p;
  for (auto [in, out] : spec.dense_shapes()) p.dense.push_back({Matrix(out, in), std::vector<double>(out, 0.0)});
  return p;
}

// Glorot-uniform weights (limit sqrt(6 / (fan_in + fan_out))), zero biases.
inline ModelParams init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelParams p = zero_params(spec);
  Rng rng(seed);
  for (auto& d : p.dense) {
    const double limit = std::sqrt(6.0 / static_cast<double>(d.w.rows + d.w.cols));
    for (double& v : d.w.data) v = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return p;
}

}  // namespace twr::nn
