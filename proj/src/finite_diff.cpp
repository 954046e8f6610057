#include "p1kan/finite_diff.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "p1kan/errors.hpp"

namespace p1kan {

std::vector<double> finite_diff_grad(const ScalarFunction& fn, std::span<const double> params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite difference step must be positive");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> grad(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + h;
    const double fp = fn(p);
    p[i] = saved - h;
    const double fm = fn(p);
    p[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("non-finite function value when perturbing coordinate " + std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace p1kan
