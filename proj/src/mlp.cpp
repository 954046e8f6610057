#include "p1kan/mlp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "p1kan/errors.hpp"

namespace p1kan {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;
using ConstVec = Eigen::Map<const Eigen::RowVectorXd>;

ConstMap view(const Matrix& m) { return ConstMap(m.data.data(), m.rows, m.cols); }
MutMap view(Matrix& m) { return MutMap(m.data.data(), m.rows, m.cols); }

void affine(const DenseLayer& layer, const Matrix& in, Matrix& out, Backend backend) {
  const std::size_t n = in.rows;
  const std::size_t n_out = layer.weights.rows;
  const std::size_t n_in = layer.weights.cols;
  out = Matrix(n, n_out, 0.0);
  if (backend == Backend::parallel) {
    auto z = view(out);
    z.noalias() = view(in) * view(layer.weights).transpose();
    z.rowwise() += ConstVec(layer.bias.data(), n_out);
    return;
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t o = 0; o < n_out; ++o) {
      double acc = layer.bias[o];
      for (std::size_t q = 0; q < n_in; ++q) acc += layer.weights(o, q) * in(s, q);
      out(s, o) = acc;
    }
  }
}

void check_input(const MlpNetwork& net, const Matrix& inputs) {
  validate_mlp(net);
  if (inputs.cols != net.input_dim()) {
    throw ShapeError("MLP input has " + std::to_string(inputs.cols) + " columns, expected " +
                     std::to_string(net.input_dim()));
  }
  for (std::size_t q = 0; q < inputs.data.size(); ++q) {
    if (!std::isfinite(inputs.data[q])) {
      throw NumericalError("non-finite MLP input at sample " + std::to_string(q / inputs.cols));
    }
  }
}

}  // namespace

std::vector<std::size_t> MlpNetwork::widths() const {
  std::vector<std::size_t> w{layers.front().weights.cols};
  for (const auto& layer : layers) w.push_back(layer.weights.rows);
  return w;
}

MlpNetwork build_mlp(std::span<const std::size_t> widths, Rng& rng) {
  if (widths.size() < 2) throw ShapeError("MLP needs at least an input and an output width");
  MlpNetwork net;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] == 0 || widths[l + 1] == 0) throw ShapeError("MLP widths must be positive");
    DenseLayer layer;
    layer.weights = Matrix(widths[l + 1], widths[l]);
    layer.bias.assign(widths[l + 1], 0.0);
    const double bound = std::sqrt(6.0 / static_cast<double>(widths[l]));
    for (double& w : layer.weights.data) w = rng.uniform(-bound, bound);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

void validate_mlp(const MlpNetwork& net) {
  if (net.layers.empty()) throw ShapeError("MLP has no layers");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (layer.bias.size() != layer.weights.rows || layer.weights.data.size() != layer.weights.rows * layer.weights.cols) {
      throw ShapeError("MLP layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l + 1 < net.layers.size() && layer.weights.rows != net.layers[l + 1].weights.cols) {
      throw ShapeError("MLP width mismatch after layer " + std::to_string(l));
    }
  }
}

MlpForward mlp_forward(const MlpNetwork& net, const Matrix& inputs, Backend backend) {
  check_input(net, inputs);
  MlpForward fwd;
  const std::size_t depth = net.layers.size();
  fwd.cache.inputs.reserve(depth);
  fwd.cache.preactivations.reserve(depth - 1);
  Matrix current = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    Matrix z;
    affine(net.layers[l], current, z, backend);
    fwd.cache.inputs.push_back(std::move(current));
    if (l + 1 == depth) {
      current = std::move(z);
      break;
    }
    current = z;
    for (double& v : current.data) v = v > 0.0 ? v : 0.0;
    fwd.cache.preactivations.push_back(std::move(z));
  }
  fwd.outputs = std::move(current);
  return fwd;
}

Matrix mlp_predict(const MlpNetwork& net, const Matrix& inputs, Backend backend) {
  check_input(net, inputs);
  Matrix current = inputs;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    Matrix z;
    affine(net.layers[l], current, z, backend);
    if (l + 1 < net.layers.size()) {
      for (double& v : z.data) v = v > 0.0 ? v : 0.0;
    }
    current = std::move(z);
  }
  return current;
}

std::vector<DenseGradients> mlp_backward(const MlpNetwork& net, const MlpCache& cache, const Matrix& grad_out,
                                         Backend backend) {
  const std::size_t depth = net.layers.size();
  if (cache.inputs.size() != depth || cache.preactivations.size() + 1 != depth) {
    throw ShapeError("mlp_backward: cache does not match network depth");
  }
  const std::size_t n = cache.inputs.front().rows;
  if (grad_out.rows != n || grad_out.cols != net.output_dim()) {
    throw ShapeError("mlp_backward: gradient shape mismatch");
  }
  std::vector<DenseGradients> grads(depth);
  Matrix delta = grad_out;  // gradient w.r.t. pre-activation of layer l
  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = net.layers[l];
    const Matrix& in = cache.inputs[l];
    const std::size_t n_out = layer.weights.rows;
    const std::size_t n_in = layer.weights.cols;
    DenseGradients& g = grads[l];
    g.weights = Matrix(n_out, n_in, 0.0);
    g.bias.assign(n_out, 0.0);
    Matrix upstream(n, n_in, 0.0);

    if (backend == Backend::parallel) {
      view(g.weights).noalias() = view(delta).transpose() * view(in);
      // Fixed summation order; Eigen's reductions peel by buffer alignment.
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < n_out; ++o) g.bias[o] += delta(s, o);
      }
      if (l > 0) view(upstream).noalias() = view(delta) * view(layer.weights);
    } else {
      for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t o = 0; o < n_out; ++o) {
          const double d = delta(s, o);
          g.bias[o] += d;
          for (std::size_t q = 0; q < n_in; ++q) {
            g.weights(o, q) += d * in(s, q);
            upstream(s, q) += d * layer.weights(o, q);
          }
        }
      }
    }

    if (l > 0) {
      const Matrix& z = cache.preactivations[l - 1];
      for (std::size_t q = 0; q < upstream.data.size(); ++q) {
        if (!(z.data[q] > 0.0)) upstream.data[q] = 0.0;
      }
      delta = std::move(upstream);
    }
  }
  return grads;
}

std::size_t count_params(const MlpNetwork& net) {
  std::size_t total = 0;
  for (const auto& layer : net.layers) total += layer.weights.data.size() + layer.bias.size();
  return total;
}

}  // namespace p1kan
