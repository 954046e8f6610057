#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "p1kan/backend.hpp"
#include "p1kan/hyper_rectangle.hpp"
#include "p1kan/layer.hpp"
#include "p1kan/matrix.hpp"
#include "p1kan/rng.hpp"

namespace p1kan {

// Minimum width of a propagated support; narrower lattices are widened
// symmetrically before they become the next layer's support.
inline constexpr double kLatticeEpsilon = 1e-8;

// Stack of P1-KAN layers. Layer 0 lives on `domain`; layer l+1 lives on the
// (widened) output lattice of layer l, recomputed from the coefficients on
// every forward pass.
struct P1KanNetwork {
  std::vector<P1KanLayer> layers;
  HyperRectangle domain;

  std::size_t input_dim() const { return layers.front().d0; }
  std::size_t output_dim() const { return layers.back().d1; }
  std::size_t meshes() const { return layers.front().meshes; }
  // widths = {d0 of layer 0, d1 of layer 0, ..., d1 of last layer}
  std::vector<std::size_t> widths() const;

  bool operator==(const P1KanNetwork&) const = default;
};

// widths {n_in, h_1, ..., n_out}: one layer per consecutive pair.
P1KanNetwork build_network(std::span<const std::size_t> widths, std::size_t meshes, const HyperRectangle& domain,
                           Rng& rng, double init_scale = 1.0);

// Throws ShapeError unless consecutive widths match and the domain fits.
void validate_network(const P1KanNetwork& net);

struct NetworkForward {
  Matrix outputs;
  std::vector<ForwardCache> caches;       // per layer
  std::vector<HyperRectangle> supports;   // per layer; supports[0] = domain
  std::vector<Lattice> lattices;          // raw output lattice per layer
  std::vector<std::vector<bool>> widened; // per layer l >= 1: which support directions were widened
};

NetworkForward network_forward(const P1KanNetwork& net, const Matrix& inputs);

// Values only. `backend` selects the kernel family.
Matrix network_predict(const P1KanNetwork& net, const Matrix& inputs, Backend backend = Backend::parallel);

struct ParameterGradients {
  std::vector<double> coeffs;
  Matrix logits;
};

// Reverse pass. Support gradients of layer l+1 flow into layer l's
// coefficients through the selected min / max entries of its lattice.
std::vector<ParameterGradients> network_backward(const P1KanNetwork& net, const NetworkForward& fwd,
                                                 const Matrix& grad_out, Backend backend = Backend::parallel);

std::size_t count_params(const P1KanNetwork& net);

void clamp_logits(P1KanNetwork& net);

}  // namespace p1kan
