#include "p1kan/layer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "p1kan/errors.hpp"
#include "layer_detail.hpp"

namespace p1kan {

P1KanLayer new_layer(std::size_t d0, std::size_t d1, std::size_t meshes, Rng& rng, double init_scale) {
  if (d0 == 0 || d1 == 0 || meshes == 0) {
    throw std::invalid_argument("layer widths and mesh count must be >= 1");
  }
  P1KanLayer layer;
  layer.d0 = d0;
  layer.d1 = d1;
  layer.meshes = meshes;
  layer.logits = Matrix(meshes, d0, 0.0);
  layer.coeffs.resize(d1 * (meshes + 1) * d0);
  const double bound = init_scale / static_cast<double>(d0);
  for (double& a : layer.coeffs) a = rng.uniform(-bound, bound);
  return layer;
}

void clamp_logits(P1KanLayer& layer) {
  for (double& y : layer.logits.data) y = std::clamp(y, -kLogitBound, kLogitBound);
}

namespace detail {

void check_support(const HyperRectangle& support, std::size_t d0) {
  support.validate();
  if (support.dim() != d0) {
    throw ShapeError("support has dimension " + std::to_string(support.dim()) + ", layer expects " +
                     std::to_string(d0));
  }
}

Matrix prepare_inputs(const HyperRectangle& support, const Matrix& inputs, InputPolicy policy) {
  const std::size_t d0 = support.dim();
  if (inputs.cols != d0) {
    throw ShapeError("input has " + std::to_string(inputs.cols) + " columns, layer expects " + std::to_string(d0));
  }
  Matrix out = inputs;
  for (std::size_t s = 0; s < out.rows; ++s) {
    for (std::size_t i = 0; i < d0; ++i) {
      double& x = out(s, i);
      if (!std::isfinite(x)) {
        throw NumericalError("non-finite input at sample " + std::to_string(s));
      }
      const double lo = support.lower[i];
      const double hi = support.upper[i];
      if (policy == InputPolicy::strict) {
        const double tol = kSupportTolerance * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (x < lo - tol || x > hi + tol) {
          throw NumericalError("input outside layer support at sample " + std::to_string(s) + ", direction " +
                               std::to_string(i));
        }
      }
      x = std::clamp(x, lo, hi);
    }
  }
  return out;
}

void stabilized_weights(const Matrix& logits, std::size_t i, std::vector<double>& weights,
                        std::vector<double>& ratios) {
  const std::size_t m = logits.rows;
  double ymin = logits(0, i);
  for (std::size_t k = 1; k < m; ++k) ymin = std::min(ymin, logits(k, i));
  weights.resize(m);
  ratios.assign(m + 1, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    weights[k] = std::exp(-(logits(k, i) - ymin));
    total += weights[k];
  }
  double partial = 0.0;
  for (std::size_t j = 1; j < m; ++j) {
    partial += weights[j - 1];
    ratios[j] = partial / total;
  }
  ratios[m] = 1.0;
  for (double& w : weights) w /= total;
}

}  // namespace detail

VertexGrid compute_vertices(const Matrix& logits, const HyperRectangle& support) {
  detail::check_support(support, logits.cols);
  if (logits.rows == 0) throw std::invalid_argument("logit matrix has no rows");
  VertexGrid grid;
  grid.dims = logits.cols;
  grid.meshes = logits.rows;
  const std::size_t m = grid.meshes;
  grid.vertices.resize(grid.dims * (m + 1));
  std::vector<double> weights;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < grid.dims; ++i) {
    const double lo = support.lower[i];
    const double hi = support.upper[i];
    if (!(hi > lo)) {
      throw std::invalid_argument("support has zero width in direction " + std::to_string(i));
    }
    detail::stabilized_weights(logits, i, weights, ratios);
    double* v = grid.vertices.data() + i * (m + 1);
    v[0] = lo;
    for (std::size_t j = 1; j < m; ++j) v[j] = lo + (hi - lo) * ratios[j];
    v[m] = hi;
  }
  return grid;
}

namespace {

// Caller guarantees v_0 <= x <= v_M.
BasisWeights bracket(std::span<const double> vertices, double x) noexcept {
  const std::size_t m = vertices.size() - 1;
  auto it = std::upper_bound(vertices.begin(), vertices.end(), x);
  std::size_t j = static_cast<std::size_t>(it - vertices.begin()) - 1;
  if (j >= m) j = m - 1;
  const double h = vertices[j + 1] - vertices[j];
  if (!(h > 0.0)) return {j, 0.0, 1.0};  // collapsed last interval, x == v_M
  return {j, (vertices[j + 1] - x) / h, (x - vertices[j]) / h};
}

}  // namespace

BasisWeights basis_eval(std::span<const double> vertices, double x) {
  if (vertices.size() < 2) throw std::invalid_argument("basis needs at least two vertices");
  if (!(x >= vertices.front() && x <= vertices.back())) {
    throw NumericalError("basis evaluated outside its support");
  }
  return bracket(vertices, x);
}

namespace {

void forward_kernel(const P1KanLayer& layer, const VertexGrid& grid, const Matrix& x, Matrix& out,
                    std::vector<BasisWeights>* basis) {
  const std::size_t n = x.rows;
  const std::size_t d0 = layer.d0;
  const std::size_t d1 = layer.d1;
  const std::size_t k_stride = (layer.meshes + 1) * d0;
  const double* a = layer.coeffs.data();
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < n; ++s) {
    double* o = out.data.data() + s * d1;
    for (std::size_t i = 0; i < d0; ++i) {
      const BasisWeights b = bracket(grid.direction(i), x(s, i));
      if (basis) (*basis)[s * d0 + i] = b;
      const double* a0 = a + b.interval * d0 + i;
      for (std::size_t k = 0; k < d1; ++k) {
        o[k] += a0[k * k_stride] * b.left + a0[k * k_stride + d0] * b.right;
      }
    }
  }
}

}  // namespace

LayerForward layer_forward(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                           InputPolicy policy) {
  detail::check_support(support, layer.d0);
  LayerForward result;
  result.cache.inputs = detail::prepare_inputs(support, inputs, policy);
  result.cache.grid = compute_vertices(layer.logits, support);
  result.cache.basis.resize(inputs.rows * layer.d0);
  result.outputs = Matrix(inputs.rows, layer.d1, 0.0);
  forward_kernel(layer, result.cache.grid, result.cache.inputs, result.outputs, &result.cache.basis);
  return result;
}

Matrix layer_apply(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                   InputPolicy policy) {
  detail::check_support(support, layer.d0);
  const Matrix x = detail::prepare_inputs(support, inputs, policy);
  const VertexGrid grid = compute_vertices(layer.logits, support);
  Matrix out(inputs.rows, layer.d1, 0.0);
  forward_kernel(layer, grid, x, out, nullptr);
  return out;
}

Lattice output_lattice_with_selectors(const P1KanLayer& layer) {
  const std::size_t d0 = layer.d0;
  const std::size_t d1 = layer.d1;
  Lattice lat;
  lat.box.lower.assign(d1, 0.0);
  lat.box.upper.assign(d1, 0.0);
  lat.argmin.assign(d1 * d0, 0);
  lat.argmax.assign(d1 * d0, 0);
  for (std::size_t k = 0; k < d1; ++k) {
    for (std::size_t i = 0; i < d0; ++i) {
      std::size_t jmin = 0;
      std::size_t jmax = 0;
      for (std::size_t j = 1; j <= layer.meshes; ++j) {
        const double a = layer.coeff(k, j, i);
        if (a < layer.coeff(k, jmin, i)) jmin = j;
        if (a > layer.coeff(k, jmax, i)) jmax = j;
      }
      lat.argmin[k * d0 + i] = jmin;
      lat.argmax[k * d0 + i] = jmax;
      lat.box.lower[k] += layer.coeff(k, jmin, i);
      lat.box.upper[k] += layer.coeff(k, jmax, i);
    }
  }
  return lat;
}

HyperRectangle output_lattice(const P1KanLayer& layer) { return output_lattice_with_selectors(layer).box; }

LayerGradients layer_backward(const P1KanLayer& layer, const ForwardCache& cache, const Matrix& grad_out) {
  const std::size_t n = cache.inputs.rows;
  const std::size_t d0 = layer.d0;
  const std::size_t d1 = layer.d1;
  const std::size_t m = layer.meshes;
  if (grad_out.rows != n || grad_out.cols != d1 || cache.basis.size() != n * d0 || cache.grid.dims != d0 ||
      cache.grid.meshes != m || layer.logits.rows != m || layer.logits.cols != d0) {
    throw ShapeError("layer_backward: gradient, cache and layer shapes do not match");
  }
  const std::size_t k_stride = (m + 1) * d0;
  const std::size_t a_size = layer.coeffs.size();
  const std::size_t v_size = d0 * (m + 1);

  LayerGradients g;
  g.inputs = Matrix(n, d0, 0.0);

  const std::size_t shards = (n + kRowsPerShard - 1) / kRowsPerShard;
  std::vector<double> shard_a(shards * a_size, 0.0);
  std::vector<double> shard_v(shards * v_size, 0.0);
  const double* a = layer.coeffs.data();

#pragma omp parallel for schedule(static)
  for (std::size_t sh = 0; sh < shards; ++sh) {
    double* ga = shard_a.data() + sh * a_size;
    double* gv = shard_v.data() + sh * v_size;
    const std::size_t end = std::min(n, (sh + 1) * kRowsPerShard);
    for (std::size_t s = sh * kRowsPerShard; s < end; ++s) {
      const double* go = grad_out.data.data() + s * d1;
      for (std::size_t i = 0; i < d0; ++i) {
        const BasisWeights& b = cache.basis[s * d0 + i];
        const std::size_t j = b.interval;
        const auto dir = cache.grid.direction(i);
        const double h = dir[j + 1] - dir[j];
        const std::size_t base = j * d0 + i;
        double dot = 0.0;
        for (std::size_t k = 0; k < d1; ++k) {
          const std::size_t idx = k * k_stride + base;
          ga[idx] += go[k] * b.left;
          ga[idx + d0] += go[k] * b.right;
          dot += go[k] * (a[idx + d0] - a[idx]);
        }
        const double gx = h > 0.0 ? dot / h : 0.0;
        g.inputs(s, i) = gx;
        gv[i * (m + 1) + j] -= gx * b.left;
        gv[i * (m + 1) + j + 1] -= gx * b.right;
      }
    }
  }

  g.coeffs.assign(a_size, 0.0);
  std::vector<double> gvert(v_size, 0.0);
  for (std::size_t sh = 0; sh < shards; ++sh) {
    const double* ga = shard_a.data() + sh * a_size;
    const double* gv = shard_v.data() + sh * v_size;
    for (std::size_t q = 0; q < a_size; ++q) g.coeffs[q] += ga[q];
    for (std::size_t q = 0; q < v_size; ++q) gvert[q] += gv[q];
  }

  // Vertex gradients -> support bounds and logits.
  // d v_j / d y_k = W * w_k * (r_j - [k <= j]) with w the normalized weights.
  g.logits = Matrix(m, d0, 0.0);
  g.support_lower.assign(d0, 0.0);
  g.support_upper.assign(d0, 0.0);
  std::vector<double> weights;
  std::vector<double> ratios;
  for (std::size_t i = 0; i < d0; ++i) {
    const auto dir = cache.grid.direction(i);
    const double width = dir[m] - dir[0];
    detail::stabilized_weights(layer.logits, i, weights, ratios);
    const double* gv = gvert.data() + i * (m + 1);
    double weighted = 0.0;
    double plain = 0.0;
    for (std::size_t j = 0; j <= m; ++j) {
      weighted += gv[j] * ratios[j];
      plain += gv[j];
    }
    g.support_upper[i] = weighted;
    g.support_lower[i] = plain - weighted;
    // suffix = sum_{j >= k} gv[j] for logit row k-1 (k = 1..M)
    double suffix = 0.0;
    for (std::size_t k = m; k >= 1; --k) {
      suffix += gv[k];
      g.logits(k - 1, i) = width * weights[k - 1] * (weighted - suffix);
    }
  }
  return g;
}

}  // namespace p1kan
