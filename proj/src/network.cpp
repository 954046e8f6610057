#include "p1kan/network.hpp"

#include <cmath>
#include <string>

#include "p1kan/errors.hpp"

namespace p1kan {
namespace {

HyperRectangle next_support(const HyperRectangle& lattice, std::size_t layer_index, std::vector<bool>* widened) {
  for (std::size_t k = 0; k < lattice.dim(); ++k) {
    if (!std::isfinite(lattice.lower[k]) || !std::isfinite(lattice.upper[k])) {
      throw NumericalError("non-finite output lattice in layer " + std::to_string(layer_index));
    }
  }
  return widen_degenerate(lattice, kLatticeEpsilon, widened);
}

}  // namespace

std::vector<std::size_t> P1KanNetwork::widths() const {
  std::vector<std::size_t> w;
  w.reserve(layers.size() + 1);
  w.push_back(layers.front().d0);
  for (const auto& layer : layers) w.push_back(layer.d1);
  return w;
}

P1KanNetwork build_network(std::span<const std::size_t> widths, std::size_t meshes, const HyperRectangle& domain,
                           Rng& rng, double init_scale) {
  if (widths.size() < 2) throw ShapeError("network needs at least an input and an output width");
  domain.validate();
  if (domain.dim() != widths[0]) {
    throw ShapeError("domain dimension " + std::to_string(domain.dim()) + " does not match input width " +
                     std::to_string(widths[0]));
  }
  P1KanNetwork net;
  net.domain = domain;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    net.layers.push_back(new_layer(widths[l], widths[l + 1], meshes, rng, init_scale));
  }
  return net;
}

void validate_network(const P1KanNetwork& net) {
  if (net.layers.empty()) throw ShapeError("network has no layers");
  net.domain.validate();
  if (net.domain.dim() != net.layers.front().d0) throw ShapeError("domain does not match first layer");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (layer.coeffs.size() != layer.d1 * (layer.meshes + 1) * layer.d0 || layer.logits.rows != layer.meshes ||
        layer.logits.cols != layer.d0) {
      throw ShapeError("layer " + std::to_string(l) + " has inconsistent tensor shapes");
    }
    if (l + 1 < net.layers.size() && layer.d1 != net.layers[l + 1].d0) {
      throw ShapeError("width mismatch between layers " + std::to_string(l) + " and " + std::to_string(l + 1));
    }
  }
}

NetworkForward network_forward(const P1KanNetwork& net, const Matrix& inputs) {
  validate_network(net);
  NetworkForward fwd;
  const std::size_t depth = net.layers.size();
  fwd.caches.reserve(depth);
  fwd.supports.reserve(depth);
  fwd.lattices.reserve(depth);
  fwd.widened.resize(depth);

  HyperRectangle support = net.domain;
  Matrix current = inputs;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto policy = l == 0 ? InputPolicy::clamp : InputPolicy::strict;
    LayerForward step = layer_forward(net.layers[l], support, current, policy);
    fwd.supports.push_back(support);
    fwd.caches.push_back(std::move(step.cache));
    fwd.lattices.push_back(output_lattice_with_selectors(net.layers[l]));
    current = std::move(step.outputs);
    if (l + 1 < depth) {
      support = next_support(fwd.lattices.back().box, l, &fwd.widened[l + 1]);
    }
  }
  fwd.outputs = std::move(current);
  return fwd;
}

Matrix network_predict(const P1KanNetwork& net, const Matrix& inputs, Backend backend) {
  validate_network(net);
  HyperRectangle support = net.domain;
  Matrix current = inputs;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto policy = l == 0 ? InputPolicy::clamp : InputPolicy::strict;
    current = backend == Backend::parallel ? layer_apply(net.layers[l], support, current, policy)
                                           : reference::layer_apply(net.layers[l], support, current, policy);
    if (l + 1 < net.layers.size()) {
      support = next_support(output_lattice(net.layers[l]), l, nullptr);
    }
  }
  return current;
}

std::vector<ParameterGradients> network_backward(const P1KanNetwork& net, const NetworkForward& fwd,
                                                 const Matrix& grad_out, Backend backend) {
  const std::size_t depth = net.layers.size();
  if (fwd.caches.size() != depth || fwd.supports.size() != depth || fwd.lattices.size() != depth) {
    throw ShapeError("network_backward: forward record does not match the network depth");
  }
  std::vector<ParameterGradients> grads(depth);
  Matrix upstream = grad_out;
  std::vector<double> pending_lower;
  std::vector<double> pending_upper;

  for (std::size_t l = depth; l-- > 0;) {
    const P1KanLayer& layer = net.layers[l];
    const ForwardCache& cache = fwd.caches[l];
    LayerGradients g = backend == Backend::parallel
                           ? layer_backward(layer, cache, upstream)
                           : reference::layer_backward(layer, fwd.supports[l], cache.inputs, upstream);

    grads[l].coeffs = std::move(g.coeffs);
    grads[l].logits = std::move(g.logits);

    // Gradients w.r.t. this layer's output lattice, coming from layer l+1's support.
    if (!pending_lower.empty()) {
      const Lattice& lat = fwd.lattices[l];
      const std::vector<bool>& widened = fwd.widened[l + 1];
      for (std::size_t k = 0; k < layer.d1; ++k) {
        double g_lo = pending_lower[k];
        double g_hi = pending_upper[k];
        if (widened[k]) {
          // lo' = mid - eps/2, hi' = mid + eps/2 with mid = (lo + hi) / 2
          const double half = 0.5 * (g_lo + g_hi);
          g_lo = half;
          g_hi = half;
        }
        for (std::size_t i = 0; i < layer.d0; ++i) {
          grads[l].coeffs[layer.coeff_index(k, lat.argmin[k * layer.d0 + i], i)] += g_lo;
          grads[l].coeffs[layer.coeff_index(k, lat.argmax[k * layer.d0 + i], i)] += g_hi;
        }
      }
    }
    pending_lower = std::move(g.support_lower);
    pending_upper = std::move(g.support_upper);
    upstream = std::move(g.inputs);
  }
  return grads;
}

std::size_t count_params(const P1KanNetwork& net) {
  std::size_t total = 0;
  for (const auto& layer : net.layers) total += layer.d1 * (layer.meshes + 1) * layer.d0 + layer.meshes * layer.d0;
  return total;
}

void clamp_logits(P1KanNetwork& net) {
  for (auto& layer : net.layers) clamp_logits(layer);
}

}  // namespace p1kan
