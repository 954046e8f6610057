#pragma once

#include <functional>
#include <span>
#include <vector>

namespace p1kan {

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h for every coordinate.
// Throws NumericalError naming the coordinate if f is not finite there.
std::vector<double> finite_diff_grad(const ScalarFunction& fn, std::span<const double> params,
                                     double h = kDefaultFiniteDiffStep);

}  // namespace p1kan
