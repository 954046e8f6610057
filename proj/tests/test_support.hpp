#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "p1kan/layer.hpp"
#include "p1kan/matrix.hpp"
#include "p1kan/network.hpp"
#include "p1kan/rng.hpp"

namespace p1kan::testing {

// Relative error with a 1e-6 floor on the scale so that gradients which
// vanish exactly are compared in absolute terms.
inline double rel_err(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

inline double distance_to_knots(std::span<const double> vertices, double x) {
  double best = INFINITY;
  for (double v : vertices) best = std::min(best, std::abs(v - x));
  return best;
}

// Logits in [-spread, spread], coefficients in [-1, 1].
inline P1KanLayer random_layer(std::size_t d0, std::size_t d1, std::size_t m, Rng& rng, double spread = 1.0) {
  P1KanLayer layer = new_layer(d0, d1, m, rng, static_cast<double>(d0));
  for (double& y : layer.logits.data) y = rng.uniform(-spread, spread);
  return layer;
}

inline P1KanNetwork random_network(const std::vector<std::size_t>& widths, std::size_t m, Rng& rng) {
  P1KanNetwork net = build_network(widths, m, HyperRectangle::unit(widths[0]), rng);
  for (auto& layer : net.layers) {
    for (double& y : layer.logits.data) y = rng.uniform(-1.0, 1.0);
  }
  return net;
}

// Samples inside `support` at least `gap` away from every vertex.
inline Matrix off_knot_inputs(const VertexGrid& grid, const HyperRectangle& support, std::size_t n, Rng& rng,
                              double gap = 1e-3) {
  Matrix x(n, support.dim());
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < support.dim(); ++i) {
      double v;
      do {
        v = rng.uniform(support.lower[i], support.upper[i]);
      } while (distance_to_knots(grid.direction(i), v) < gap);
      x(s, i) = v;
    }
  }
  return x;
}

// Minimum distance of any layer input to a knot of its layer.
inline double min_knot_distance(const NetworkForward& fwd) {
  double best = INFINITY;
  for (const auto& cache : fwd.caches) {
    for (std::size_t s = 0; s < cache.inputs.rows; ++s) {
      for (std::size_t i = 0; i < cache.inputs.cols; ++i) {
        best = std::min(best, distance_to_knots(cache.grid.direction(i), cache.inputs(s, i)));
      }
    }
  }
  return best;
}

// Flat parameter vector: per layer coeffs then logits.
inline std::vector<double> flatten(const P1KanNetwork& net) {
  std::vector<double> p;
  for (const auto& layer : net.layers) {
    p.insert(p.end(), layer.coeffs.begin(), layer.coeffs.end());
    p.insert(p.end(), layer.logits.data.begin(), layer.logits.data.end());
  }
  return p;
}

inline void unflatten(P1KanNetwork& net, std::span<const double> p) {
  std::size_t q = 0;
  for (auto& layer : net.layers) {
    for (double& a : layer.coeffs) a = p[q++];
    for (double& y : layer.logits.data) y = p[q++];
  }
}

inline double mse(const Matrix& pred, const Matrix& target) {
  double sum = 0.0;
  for (std::size_t q = 0; q < pred.data.size(); ++q) {
    const double r = pred.data[q] - target.data[q];
    sum += r * r;
  }
  return sum / static_cast<double>(pred.rows);
}

inline Matrix mse_grad(const Matrix& pred, const Matrix& target) {
  Matrix g(pred.rows, pred.cols);
  for (std::size_t q = 0; q < pred.data.size(); ++q) {
    g.data[q] = 2.0 * (pred.data[q] - target.data[q]) / static_cast<double>(pred.rows);
  }
  return g;
}

}  // namespace p1kan::testing
