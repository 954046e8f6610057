#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "p1kan/backend.hpp"
#include "p1kan/hyper_rectangle.hpp"
#include "p1kan/matrix.hpp"
#include "p1kan/rng.hpp"

namespace p1kan {

// Logits are kept inside [-kLogitBound, kLogitBound] so every mesh interval
// keeps a strictly positive width.
inline constexpr double kLogitBound = 50.0;

/// One P1-KAN layer mapping R^d0 -> R^d1.
///
/// Each input direction i carries M intervals whose M+1 vertices are derived
/// from the logit column `logits(:, i)`. The output is
///   out_k = sum_i sum_j coeff(k, j, i) * hat_j^i(x_i)
/// with piecewise-linear hat functions on those vertices.
struct P1KanLayer {
  std::size_t d0 = 0;
  std::size_t d1 = 0;
  std::size_t meshes = 0;
  std::vector<double> coeffs;  // d1 x (M+1) x d0, row-major
  Matrix logits;               // M x d0

  std::size_t coeff_index(std::size_t k, std::size_t j, std::size_t i) const {
    return (k * (meshes + 1) + j) * d0 + i;
  }
  double& coeff(std::size_t k, std::size_t j, std::size_t i) { return coeffs[coeff_index(k, j, i)]; }
  double coeff(std::size_t k, std::size_t j, std::size_t i) const { return coeffs[coeff_index(k, j, i)]; }

  bool operator==(const P1KanLayer&) const = default;
};

// Zero logits (uniform mesh); coefficients iid uniform on
// [-init_scale/d0, init_scale/d0].
P1KanLayer new_layer(std::size_t d0, std::size_t d1, std::size_t meshes, Rng& rng, double init_scale = 1.0);

void clamp_logits(P1KanLayer& layer);

// Mesh vertices per direction, d0 rows of M+1 sorted points.
struct VertexGrid {
  std::size_t dims = 0;
  std::size_t meshes = 0;
  std::vector<double> vertices;

  std::span<const double> direction(std::size_t i) const {
    return {vertices.data() + i * (meshes + 1), meshes + 1};
  }
};

// x_j = lo + (hi - lo) * sum_{k<=j} exp(-y_k) / sum_{k<=M} exp(-y_k), with the
// column minimum subtracted before exponentiating. Requires hi > lo.
VertexGrid compute_vertices(const Matrix& logits, const HyperRectangle& support);

// Active pair of hat functions at a point: hat_interval has value `left`,
// hat_{interval+1} has value `right`.
struct BasisWeights {
  std::size_t interval = 0;
  double left = 0.0;
  double right = 0.0;
};

// Brackets x in [v_j, v_{j+1}) (last interval closed). Throws NumericalError
// if x lies outside [v_0, v_M].
BasisWeights basis_eval(std::span<const double> vertices, double x);

enum class InputPolicy {
  clamp,   // project inputs onto the support (first layer)
  strict,  // allow only roundoff-level excursions, otherwise throw
};

// Roundoff allowance for InputPolicy::strict, relative to max(1, |bound|).
inline constexpr double kSupportTolerance = 1e-12;

struct ForwardCache {
  Matrix inputs;  // after clamping
  VertexGrid grid;
  std::vector<BasisWeights> basis;  // n x d0
};

struct LayerForward {
  Matrix outputs;
  ForwardCache cache;
};

LayerForward layer_forward(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                           InputPolicy policy = InputPolicy::strict);

// Forward values only, without building a cache.
Matrix layer_apply(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                   InputPolicy policy = InputPolicy::strict);

// Output box together with the coefficient index j selected by each
// min / max (lowest j on ties), stored as [k * d0 + i].
struct Lattice {
  HyperRectangle box;
  std::vector<std::size_t> argmin;
  std::vector<std::size_t> argmax;
};

Lattice output_lattice_with_selectors(const P1KanLayer& layer);
HyperRectangle output_lattice(const P1KanLayer& layer);

struct LayerGradients {
  std::vector<double> coeffs;          // like P1KanLayer::coeffs
  Matrix logits;                       // M x d0
  Matrix inputs;                       // n x d0
  std::vector<double> support_lower;   // d0
  std::vector<double> support_upper;   // d0
};

LayerGradients layer_backward(const P1KanLayer& layer, const ForwardCache& cache, const Matrix& grad_out);

namespace reference {

// Serial implementations that evaluate every hat function from its
// closed-form definition and differentiate vertex positions through the
// dense Jacobian. Slow; used to cross-check the production kernels.
Matrix layer_apply(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                   InputPolicy policy = InputPolicy::strict);

LayerGradients layer_backward(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                              const Matrix& grad_out, InputPolicy policy = InputPolicy::strict);

double hat_value(std::span<const double> vertices, std::size_t j, double x);

}  // namespace reference

}  // namespace p1kan
