#include "p1kan/targets.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace p1kan {
namespace {

void check_unit_cube(std::span<const double> x) {
  if (x.empty()) throw std::domain_error("target function needs d >= 1");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) {
      throw std::domain_error("target argument outside [0,1] in coordinate " + std::to_string(i));
    }
  }
}

double frac(double v) { return v - std::floor(v); }

}  // namespace

double function_a(std::span<const double> x) {
  check_unit_cube(x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.size()));
  double phase = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = 0.5 + (2.0 * x[i] - 1.0) * scale;
    phase += static_cast<double>(i + 1) * y;
  }
  return std::cos(phase);
}

double function_b(std::span<const double> x) {
  check_unit_cube(x);
  // Each y_i lies in [-1, 1), so |prod y| <= 1, and 2 frac(.) - 1 lies in
  // [-1, 1): the bracket is in [-2, 2) and f in [-2d, 2d).
  // At x_i = 1 the floor is applied literally (frac(4) = 0, y_i = -1).
  double prod_y = 1.0;
  double prod_x = 1.0;
  for (double xi : x) {
    prod_y *= 2.0 * frac(4.0 * xi) - 1.0;
    prod_x *= xi;
  }
  const double d = static_cast<double>(x.size());
  return d * (prod_y + 2.0 * frac(4.0 * prod_x) - 1.0);
}

double evaluate_target(TargetKind kind, std::span<const double> x) {
  return kind == TargetKind::a ? function_a(x) : function_b(x);
}

std::vector<double> evaluate_target(TargetKind kind, const Matrix& points) {
  std::vector<double> out(points.rows);
  for (std::size_t s = 0; s < points.rows; ++s) out[s] = evaluate_target(kind, points.row(s));
  return out;
}

std::string_view to_string(TargetKind kind) { return kind == TargetKind::a ? "A" : "B"; }

std::optional<TargetKind> parse_target(std::string_view name) {
  if (name == "A" || name == "a") return TargetKind::a;
  if (name == "B" || name == "b") return TargetKind::b;
  return std::nullopt;
}

}  // namespace p1kan
