#include "p1kan/hyper_rectangle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace p1kan {

HyperRectangle::HyperRectangle(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {}

HyperRectangle HyperRectangle::unit(std::size_t dim) {
  return HyperRectangle(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

void HyperRectangle::validate() const {
  if (lower.size() != upper.size()) {
    throw std::invalid_argument("box bounds have different dimensions");
  }
  if (lower.empty()) {
    throw std::invalid_argument("box has zero dimension");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw std::invalid_argument("box bound not finite in direction " + std::to_string(i));
    }
    if (lower[i] > upper[i]) {
      throw std::invalid_argument("box lower > upper in direction " + std::to_string(i));
    }
  }
}

bool HyperRectangle::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower[i] - tol && x[i] <= upper[i] + tol)) return false;
  }
  return true;
}

HyperRectangle widen_degenerate(const HyperRectangle& box, double eps, std::vector<bool>* widened_mask) {
  HyperRectangle out = box;
  if (widened_mask) widened_mask->assign(box.dim(), false);
  for (std::size_t i = 0; i < box.dim(); ++i) {
    if (box.width(i) < eps) {
      const double mid = 0.5 * (box.lower[i] + box.upper[i]);
      out.lower[i] = mid - 0.5 * eps;
      out.upper[i] = mid + 0.5 * eps;
      if (widened_mask) (*widened_mask)[i] = true;
    }
  }
  return out;
}

}  // namespace p1kan
