#include <cmath>
#include <vector>

#include "p1kan/errors.hpp"
#include "p1kan/layer.hpp"
#include "layer_detail.hpp"

namespace p1kan::reference {
namespace {

// Direct evaluation of x_j = lo + W * S_j / S_M without stabilization.
std::vector<double> plain_vertices(const Matrix& logits, std::size_t i, double lo, double hi) {
  const std::size_t m = logits.rows;
  std::vector<double> partial(m + 1, 0.0);
  for (std::size_t k = 1; k <= m; ++k) partial[k] = partial[k - 1] + std::exp(-logits(k - 1, i));
  std::vector<double> v(m + 1);
  for (std::size_t j = 0; j <= m; ++j) v[j] = lo + (hi - lo) * partial[j] / partial[m];
  v[0] = lo;
  v[m] = hi;
  return v;
}

struct HatDerivatives {
  double value = 0.0;
  double dx = 0.0;
  double dprev = 0.0;  // w.r.t. v_{j-1}
  double dself = 0.0;  // w.r.t. v_j
  double dnext = 0.0;  // w.r.t. v_{j+1}
};

bool on_rising(std::span<const double> v, std::size_t j, double x) {
  const std::size_t m = v.size() - 1;
  return j > 0 && x >= v[j - 1] && (x < v[j] || (j == m && x <= v[j]));
}

bool on_falling(std::span<const double> v, std::size_t j, double x) {
  const std::size_t m = v.size() - 1;
  return j < m && x >= v[j] && x < v[j + 1];
}

HatDerivatives hat_derivatives(std::span<const double> v, std::size_t j, double x) {
  HatDerivatives d;
  if (on_rising(v, j, x)) {
    const double h = v[j] - v[j - 1];
    d.value = (x - v[j - 1]) / h;
    d.dx = 1.0 / h;
    d.dprev = (x - v[j]) / (h * h);
    d.dself = -(x - v[j - 1]) / (h * h);
  } else if (on_falling(v, j, x)) {
    const double h = v[j + 1] - v[j];
    d.value = (v[j + 1] - x) / h;
    d.dx = -1.0 / h;
    d.dself = (v[j + 1] - x) / (h * h);
    d.dnext = (x - v[j]) / (h * h);
  }
  return d;
}

}  // namespace

double hat_value(std::span<const double> vertices, std::size_t j, double x) {
  if (on_rising(vertices, j, x)) return (x - vertices[j - 1]) / (vertices[j] - vertices[j - 1]);
  if (on_falling(vertices, j, x)) return (vertices[j + 1] - x) / (vertices[j + 1] - vertices[j]);
  return 0.0;
}

Matrix layer_apply(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                   InputPolicy policy) {
  detail::check_support(support, layer.d0);
  const Matrix x = detail::prepare_inputs(support, inputs, policy);
  Matrix out(x.rows, layer.d1, 0.0);
  for (std::size_t i = 0; i < layer.d0; ++i) {
    const auto v = plain_vertices(layer.logits, i, support.lower[i], support.upper[i]);
    for (std::size_t s = 0; s < x.rows; ++s) {
      for (std::size_t j = 0; j <= layer.meshes; ++j) {
        const double psi = hat_value(v, j, x(s, i));
        for (std::size_t k = 0; k < layer.d1; ++k) out(s, k) += layer.coeff(k, j, i) * psi;
      }
    }
  }
  return out;
}

LayerGradients layer_backward(const P1KanLayer& layer, const HyperRectangle& support, const Matrix& inputs,
                              const Matrix& grad_out, InputPolicy policy) {
  detail::check_support(support, layer.d0);
  const Matrix x = detail::prepare_inputs(support, inputs, policy);
  if (grad_out.rows != x.rows || grad_out.cols != layer.d1) {
    throw ShapeError("reference::layer_backward: gradient shape mismatch");
  }
  const std::size_t m = layer.meshes;
  LayerGradients g;
  g.coeffs.assign(layer.coeffs.size(), 0.0);
  g.logits = Matrix(m, layer.d0, 0.0);
  g.inputs = Matrix(x.rows, layer.d0, 0.0);
  g.support_lower.assign(layer.d0, 0.0);
  g.support_upper.assign(layer.d0, 0.0);

  for (std::size_t i = 0; i < layer.d0; ++i) {
    const double lo = support.lower[i];
    const double hi = support.upper[i];
    const auto v = plain_vertices(layer.logits, i, lo, hi);
    std::vector<double> gvert(m + 1, 0.0);
    for (std::size_t s = 0; s < x.rows; ++s) {
      for (std::size_t j = 0; j <= m; ++j) {
        const HatDerivatives d = hat_derivatives(v, j, x(s, i));
        double c = 0.0;
        for (std::size_t k = 0; k < layer.d1; ++k) {
          g.coeffs[layer.coeff_index(k, j, i)] += grad_out(s, k) * d.value;
          c += grad_out(s, k) * layer.coeff(k, j, i);
        }
        g.inputs(s, i) += c * d.dx;
        if (j > 0) gvert[j - 1] += c * d.dprev;
        gvert[j] += c * d.dself;
        if (j < m) gvert[j + 1] += c * d.dnext;
      }
    }

    // Dense Jacobian of the vertex map.
    std::vector<double> e(m + 1, 0.0);
    std::vector<double> partial(m + 1, 0.0);
    for (std::size_t k = 1; k <= m; ++k) {
      e[k] = std::exp(-layer.logits(k - 1, i));
      partial[k] = partial[k - 1] + e[k];
    }
    const double total = partial[m];
    const double width = hi - lo;
    for (std::size_t j = 0; j <= m; ++j) {
      const double r = partial[j] / total;
      g.support_lower[i] += gvert[j] * (1.0 - r);
      g.support_upper[i] += gvert[j] * r;
    }
    for (std::size_t k = 1; k <= m; ++k) {
      double acc = 0.0;
      for (std::size_t j = 1; j < m; ++j) {
        const double indicator = k <= j ? 1.0 : 0.0;
        const double dv = width * e[k] * (partial[j] - indicator * total) / (total * total);
        acc += gvert[j] * dv;
      }
      g.logits(k - 1, i) = acc;
    }
  }
  return g;
}

}  // namespace p1kan::reference
