#include "p1kan/rng.hpp"

namespace p1kan {
namespace {

using u128 = unsigned __int128;

constexpr u128 kMultiplier =
    (static_cast<u128>(2549297995355413924ULL) << 64) | 4865540595714422341ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotr64(std::uint64_t v, unsigned rot) { return (v >> rot) | (v << ((-rot) & 63U)); }

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed) {
  std::uint64_t sm = seed;
  const std::uint64_t hi = splitmix64(sm);
  const std::uint64_t lo = splitmix64(sm);
  const u128 init_state = (static_cast<u128>(hi) << 64) | lo;
  const u128 init_seq = (static_cast<u128>(stream) << 64) | 0xda3e39cb94b95bdbULL;

  // pcg_setseq_128_srandom_r
  state_ = 0;
  inc_ = (init_seq << 1U) | 1U;
  state_ = state_ * kMultiplier + inc_;
  state_ += init_state;
  state_ = state_ * kMultiplier + inc_;
}

std::uint64_t Rng::next_u64() {
  state_ = state_ * kMultiplier + inc_;
  const auto high = static_cast<std::uint64_t>(state_ >> 64);
  const auto low = static_cast<std::uint64_t>(state_);
  return rotr64(high ^ low, static_cast<unsigned>(state_ >> 122));
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

Matrix sample_uniform_batch(Rng& rng, std::size_t n, const HyperRectangle& box) {
  box.validate();
  const std::size_t d = box.dim();
  Matrix out(n, d);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      out(s, i) = box.lower[i] + box.width(i) * rng.uniform();
    }
  }
  return out;
}

}  // namespace p1kan
