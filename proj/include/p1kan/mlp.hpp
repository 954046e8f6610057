#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "p1kan/backend.hpp"
#include "p1kan/matrix.hpp"
#include "p1kan/rng.hpp"

namespace p1kan {

struct DenseLayer {
  Matrix weights;             // out x in
  std::vector<double> bias;   // out

  bool operator==(const DenseLayer&) const = default;
};

// Feedforward baseline: ReLU on hidden layers, identity output head.
struct MlpNetwork {
  std::vector<DenseLayer> layers;

  std::vector<std::size_t> widths() const;
  std::size_t input_dim() const { return layers.front().weights.cols; }
  std::size_t output_dim() const { return layers.back().weights.rows; }

  bool operator==(const MlpNetwork&) const = default;
};

// He-uniform weights (bound sqrt(6 / fan_in), variance 2 / fan_in), zero biases.
MlpNetwork build_mlp(std::span<const std::size_t> widths, Rng& rng);

void validate_mlp(const MlpNetwork& net);

struct MlpCache {
  std::vector<Matrix> inputs;          // input of every layer
  std::vector<Matrix> preactivations;  // pre-ReLU values of hidden layers
};

struct MlpForward {
  Matrix outputs;
  MlpCache cache;
};

MlpForward mlp_forward(const MlpNetwork& net, const Matrix& inputs, Backend backend = Backend::parallel);
Matrix mlp_predict(const MlpNetwork& net, const Matrix& inputs, Backend backend = Backend::parallel);

struct DenseGradients {
  Matrix weights;
  std::vector<double> bias;
};

// ReLU derivative is taken as 0 at exactly 0.
std::vector<DenseGradients> mlp_backward(const MlpNetwork& net, const MlpCache& cache, const Matrix& grad_out,
                                         Backend backend = Backend::parallel);

std::size_t count_params(const MlpNetwork& net);

}  // namespace p1kan
