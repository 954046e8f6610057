#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "p1kan/matrix.hpp"

namespace p1kan {

enum class TargetKind { a, b };

// Smooth, fast-oscillating: cos(sum_i i * y_i), y = 0.5 + (2x - 1) / sqrt(d).
double function_a(std::span<const double> x);

// Discontinuous:
//   d * (prod_i y_i + 2 * frac(4 * prod_i x_i) - 1),  y_i = 2 * frac(4 x_i) - 1.
double function_b(std::span<const double> x);

double evaluate_target(TargetKind kind, std::span<const double> x);
std::vector<double> evaluate_target(TargetKind kind, const Matrix& points);

std::string_view to_string(TargetKind kind);
std::optional<TargetKind> parse_target(std::string_view name);

}  // namespace p1kan
