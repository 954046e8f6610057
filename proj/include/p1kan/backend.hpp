#pragma once

#include <cstddef>

namespace p1kan {

// Kernel selection. `parallel` is the production path (OpenMP over fixed
// row shards); `reference` is the straightforward serial implementation
// kept as an independent check.
enum class Backend { parallel, reference };

// Rows per reduction shard. Shard boundaries depend only on the batch size,
// so sums come out bit-identical for any number of threads.
inline constexpr std::size_t kRowsPerShard = 128;

}  // namespace p1kan
