#pragma once

#include <stdexcept>

namespace p1kan {

// Raised when a computation meets a NaN/inf or an input outside its
// admissible range. The trainer treats it as divergence.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised on incompatible tensor shapes between paired operations.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace p1kan
