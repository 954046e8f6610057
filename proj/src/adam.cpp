#include "p1kan/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "p1kan/errors.hpp"

namespace p1kan {

AdamState adam_init(std::span<const std::size_t> param_sizes, double lr) {
  if (param_sizes.empty()) throw std::invalid_argument("adam_init: no parameter tensors");
  AdamState state;
  state.lr = lr;
  for (std::size_t size : param_sizes) {
    state.m.emplace_back(size, 0.0);
    state.v.emplace_back(size, 0.0);
  }
  return state;
}

void adam_step(AdamState& state, std::span<const ParamView> params, std::span<const std::span<const double>> grads) {
  if (params.size() != state.m.size() || grads.size() != state.m.size()) {
    throw ShapeError("adam_step: tensor count does not match optimizer state");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].values.size() != state.m[p].size() || grads[p].size() != state.m[p].size()) {
      throw ShapeError("adam_step: size mismatch for tensor '" + params[p].name + "'");
    }
    for (double g : grads[p]) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in tensor '" + params[p].name + "'");
    }
  }

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto values = params[p].values;
    const auto g = grads[p];
    auto& m = state.m[p];
    auto& v = state.v[p];
    for (std::size_t q = 0; q < values.size(); ++q) {
      m[q] = state.beta1 * m[q] + (1.0 - state.beta1) * g[q];
      v[q] = state.beta2 * v[q] + (1.0 - state.beta2) * g[q] * g[q];
      const double m_hat = m[q] / correction1;
      const double v_hat = v[q] / correction2;
      values[q] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace p1kan
