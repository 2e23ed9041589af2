#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

namespace felis::stats {

/// Reproducible random substream. Draws go through the helpers below rather
/// than <random> distributions, whose algorithms are implementation-defined.
using Stream = std::mt19937_64;

/// Substream `index` of `seed`. Distinct indices give independent streams;
/// the same pair always gives the same stream.
Stream seeded_stream(std::uint64_t seed, std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a over the bytes of `text`, finalized with splitmix64 and `seed`.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

/// Uniform integer in [0, bound); bound must be > 0.
std::uint64_t uniform_below(Stream& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Stream& rng);

/// Standard normal via Box-Muller.
double standard_normal(Stream& rng);

/// Fisher-Yates shuffle of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Stream& rng);

/// Calls fn(i) for i in [0, count), split into contiguous blocks across
/// `workers` threads. Results are independent of `workers` as long as fn(i)
/// depends only on i.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace felis::stats
