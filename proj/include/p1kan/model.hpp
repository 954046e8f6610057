#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "p1kan/adam.hpp"
#include "p1kan/backend.hpp"
#include "p1kan/matrix.hpp"
#include "p1kan/mlp.hpp"
#include "p1kan/network.hpp"

namespace p1kan {

enum class ModelKind { p1kan, mlp };

using Model = std::variant<P1KanNetwork, MlpNetwork>;

ModelKind kind_of(const Model& model);
std::size_t count_params(const Model& model);

Matrix predict(const Model& model, const Matrix& inputs, Backend backend = Backend::parallel);

// Parameter tensors in checkpoint order:
//   p1kan: per layer coeffs, logits
//   mlp:   per layer weights, bias
std::vector<ParamView> parameter_views(Model& model);
std::vector<std::size_t> parameter_sizes(const Model& model);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<std::vector<double>> grads;  // same order as parameter_views
};

// Mean squared error over the batch, single-output models only.
LossAndGradient mse_loss_and_grad(const Model& model, const Matrix& inputs, std::span<const double> targets,
                                  Backend backend = Backend::parallel);

// Projection applied after every optimizer step (logit clamp for P1-KAN).
void after_step(Model& model);

}  // namespace p1kan
