#pragma once

#include <vector>

#include "p1kan/hyper_rectangle.hpp"
#include "p1kan/layer.hpp"
#include "p1kan/matrix.hpp"

namespace p1kan::detail {

void check_support(const HyperRectangle& support, std::size_t d0);
Matrix prepare_inputs(const HyperRectangle& support, const Matrix& inputs, InputPolicy policy);

// Normalized softmax-style weights w_k = exp(-y_k) / sum exp(-y) of logit
// column i, and cumulative ratios r_0 = 0, r_j = sum_{k<=j} w_k, r_M = 1.
void stabilized_weights(const Matrix& logits, std::size_t i, std::vector<double>& weights,
                        std::vector<double>& ratios);

}  // namespace p1kan::detail
