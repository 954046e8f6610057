#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace p1kan {

// Axis-aligned box [lower, upper]. Used both as a layer support and as the
// output lattice of a layer.
struct HyperRectangle {
  std::vector<double> lower;
  std::vector<double> upper;

  HyperRectangle() = default;
  HyperRectangle(std::vector<double> lo, std::vector<double> hi);

  static HyperRectangle unit(std::size_t dim);

  std::size_t dim() const { return lower.size(); }
  double width(std::size_t i) const { return upper[i] - lower[i]; }

  // Throws std::invalid_argument unless sizes agree, entries are finite and
  // lower <= upper componentwise.
  void validate() const;
  bool contains(std::span<const double> x, double tol = 0.0) const;

  bool operator==(const HyperRectangle&) const = default;
};

// Directions narrower than `eps` are widened symmetrically around their
// midpoint to width `eps`. `widened_mask[i]` (if given) records which.
HyperRectangle widen_degenerate(const HyperRectangle& box, double eps,
                                std::vector<bool>* widened_mask = nullptr);

}  // namespace p1kan
