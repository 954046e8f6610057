#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "p1kan/hyper_rectangle.hpp"
#include "p1kan/matrix.hpp"

namespace p1kan {

/// PCG64 generator (O'Neill's PCG-XSL-RR 128/64, "setseq" variant).
///
/// The 64-bit user seed is expanded with SplitMix64 into the 128-bit initial
/// state; `stream` selects one of 2^63 independent sequences through the
/// increment. Output of the 128-bit step is folded with xor-shift-low and a
/// data-dependent rotation. Doubles take the top 53 bits of one output, so
/// streams are bit-identical on every platform with a 128-bit integer type.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t seed() const { return seed_; }

 private:
  using u128 = unsigned __int128;
  u128 state_ = 0;
  u128 inc_ = 0;
  std::uint64_t seed_ = 0;
};

inline Rng seed_rng(std::uint64_t seed, std::uint64_t stream = 0) { return Rng(seed, stream); }

// n rows drawn uniformly on `box` by affine map of unit uniforms.
Matrix sample_uniform_batch(Rng& rng, std::size_t n, const HyperRectangle& box);

}  // namespace p1kan
