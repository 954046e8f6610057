#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "p1kan/model.hpp"

namespace p1kan {

/// Binary checkpoint layout (all integers and floats little-endian):
///
///   "P1K1"                     4-byte magic
///   u32 version                currently 1
///   u32 kind                   0 = p1kan, 1 = mlp
///   u32 n_widths, u32 widths[n_widths]
///   p1kan only:  u32 M, f64 domain_lower[d], f64 domain_upper[d]
///   parameters, per layer in order:
///     p1kan: coeffs (d1 x (M+1) x d0, row-major), logits (M x d0, row-major)
///     mlp:   weights (out x in, row-major), bias (out)
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class UnsupportedVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class TruncatedCheckpointError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

std::string serialize_model(const Model& model);
Model deserialize_model(const std::string& bytes);

// File errors raise IoError (see trainer.hpp).
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace p1kan
