#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "twr/core/error.hpp"
#include "twr/nn/model.hpp"
#include "twr/nn/network.hpp"

namespace twr::nn {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::uint64_t t = 0;
  std::vector<std::vector<double>> m;  // one flat block per weight matrix / bias vector
  std::vector<std::vector<double>> v;
};

inline AdamState make_adam_state(const ModelParams& p) {
  AdamState s;
  for (const auto& d : p.dense) {
    s.m.emplace_back(d.w.data.size(), 0.0);
    s.m.emplace_back(d.b.size(), 0.0);
  }
  s.v = s.m;
  return s;
}

namespace detail {

inline void adam_block(std::vector<double>& param, const std::vector<double>& grad, std::vector<double>& m,
                       std::vector<double>& v, const AdamState& s, double step_size, double eps_hat) {
  if (param.size() != grad.size() || m.size() != param.size() || v.size() != param.size()) {
    throw InvalidArgument("adam_step: shape mismatch");
  }
  for (std::size_t k = 0; k < param.size(); ++k) {
    m[k] = s.beta1 * m[k] + (1.0 - s.beta1) * grad[k];
    v[k] = s.beta2 * v[k] + (1.0 - s.beta2) * grad[k] * grad[k];
    param[k] -= step_size * m[k] / (std::sqrt(v[k]) + eps_hat);
  }
}

}  // namespace detail

// Bias-corrected Adam written in the folded form
//   lr_t = lr * sqrt(1 - b2^t) / (1 - b1^t),  w -= lr_t * m / (sqrt(v) + eps_hat)
// with eps_hat = epsilon * sqrt(1 - b2^t), which is algebraically the textbook
// update with epsilon added to sqrt(v_hat).
inline void adam_step(ModelParams& params, const Gradients& grads, AdamState& state, double lr) {
  if (grads.dense.size() != params.dense.size() || state.m.size() != 2 * params.dense.size()) {
    throw InvalidArgument("adam_step: gradients or state do not match the parameters");
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = std::sqrt(1.0 - std::pow(state.beta2, t));
  const double step_size = lr * c2 / c1;
  const double eps_hat = state.epsilon * c2;
  for (std::size_t k = 0; k < params.dense.size(); ++k) {
    detail::adam_block(params.dense[k].w.data, grads.dense[k].w.data, state.m[2 * k], state.v[2 * k], state,
                       step_size, eps_hat);
    detail::adam_block(params.dense[k].b, grads.dense[k].b, state.m[2 * k + 1], state.v[2 * k + 1], state, step_size,
                       eps_hat);
  }
  params.version += 1;
}

}  // namespace twr::nn
