#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace p1kan {

// Mutable view of one parameter tensor, flattened.
struct ParamView {
  std::string name;
  std::span<double> values;
};

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState adam_init(std::span<const std::size_t> param_sizes, double lr = 1e-3);

// One bias-corrected ADAM update of every tensor. Throws NumericalError
// naming the tensor if any gradient entry is not finite; nothing is
// modified in that case.
void adam_step(AdamState& state, std::span<const ParamView> params, std::span<const std::span<const double>> grads);

}  // namespace p1kan
