#include "p1kan/model.hpp"

#include <string>

#include "p1kan/errors.hpp"

namespace p1kan {

ModelKind kind_of(const Model& model) {
  return std::holds_alternative<P1KanNetwork>(model) ? ModelKind::p1kan : ModelKind::mlp;
}

std::size_t count_params(const Model& model) {
  return std::visit([](const auto& net) { return count_params(net); }, model);
}

Matrix predict(const Model& model, const Matrix& inputs, Backend backend) {
  if (const auto* kan = std::get_if<P1KanNetwork>(&model)) return network_predict(*kan, inputs, backend);
  return mlp_predict(std::get<MlpNetwork>(model), inputs, backend);
}

std::vector<ParamView> parameter_views(Model& model) {
  std::vector<ParamView> views;
  if (auto* kan = std::get_if<P1KanNetwork>(&model)) {
    for (std::size_t l = 0; l < kan->layers.size(); ++l) {
      auto& layer = kan->layers[l];
      views.push_back({"layer" + std::to_string(l) + ".coeffs", layer.coeffs});
      views.push_back({"layer" + std::to_string(l) + ".logits", layer.logits.data});
    }
  } else {
    auto& mlp = std::get<MlpNetwork>(model);
    for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
      auto& layer = mlp.layers[l];
      views.push_back({"dense" + std::to_string(l) + ".weights", layer.weights.data});
      views.push_back({"dense" + std::to_string(l) + ".bias", layer.bias});
    }
  }
  return views;
}

std::vector<std::size_t> parameter_sizes(const Model& model) {
  std::vector<std::size_t> sizes;
  if (const auto* kan = std::get_if<P1KanNetwork>(&model)) {
    for (const auto& layer : kan->layers) {
      sizes.push_back(layer.coeffs.size());
      sizes.push_back(layer.logits.data.size());
    }
  } else {
    for (const auto& layer : std::get<MlpNetwork>(model).layers) {
      sizes.push_back(layer.weights.data.size());
      sizes.push_back(layer.bias.size());
    }
  }
  return sizes;
}

LossAndGradient mse_loss_and_grad(const Model& model, const Matrix& inputs, std::span<const double> targets,
                                  Backend backend) {
  if (targets.size() != inputs.rows) throw ShapeError("mse_loss_and_grad: target count differs from batch size");
  const std::size_t n = inputs.rows;
  LossAndGradient result;

  auto residual_grad = [&](const Matrix& pred) {
    if (pred.cols != 1) throw ShapeError("mse_loss_and_grad expects a scalar-output model");
    Matrix grad_out(n, 1);
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double r = pred(s, 0) - targets[s];
      sum += r * r;
      grad_out(s, 0) = 2.0 * r / static_cast<double>(n);
    }
    result.loss = sum / static_cast<double>(n);
    return grad_out;
  };

  if (const auto* kan = std::get_if<P1KanNetwork>(&model)) {
    const NetworkForward fwd = network_forward(*kan, inputs);
    const Matrix grad_out = residual_grad(fwd.outputs);
    for (auto& g : network_backward(*kan, fwd, grad_out, backend)) {
      result.grads.push_back(std::move(g.coeffs));
      result.grads.push_back(std::move(g.logits.data));
    }
  } else {
    const auto& mlp = std::get<MlpNetwork>(model);
    const MlpForward fwd = mlp_forward(mlp, inputs, backend);
    const Matrix grad_out = residual_grad(fwd.outputs);
    for (auto& g : mlp_backward(mlp, fwd.cache, grad_out, backend)) {
      result.grads.push_back(std::move(g.weights.data));
      result.grads.push_back(std::move(g.bias));
    }
  }
  return result;
}

void after_step(Model& model) {
  if (auto* kan = std::get_if<P1KanNetwork>(&model)) clamp_logits(*kan);
}

}  // namespace p1kan
