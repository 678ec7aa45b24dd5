#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "advicelab/qnet/network.hpp"

namespace advicelab::qnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <class T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, T(0)), v(n, T(0)) {}
};

// Bias-corrected Adam update in place.
template <class T>
void adam_step(std::span<T> params, std::span<const T> grads, AdamState<T>& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw ShapeMismatch("adam_step: parameter, gradient and moment sizes differ");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T step_size = static_cast<T>(cfg.learning_rate / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg.epsilon);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g * g;
    params[i] -= step_size * state.m[i] / (std::sqrt(state.v[i] * inv_c2) + eps);
  }
}

}  // namespace advicelab::qnet
