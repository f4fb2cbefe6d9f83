#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace brx {

// mt19937_64 output is fixed by the standard; the std distributions are not,
// so bounded draws go through uniform_below to keep runs bit-identical across
// standard libraries.
using Rng = std::mt19937_64;

// Unbiased integer in [0, bound). bound must be positive.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

// splitmix64 finalizer; used to derive independent per-episode seeds.
std::uint64_t mix_seed(std::uint64_t value);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

// k distinct values from [0, n), in draw order (partial Fisher-Yates).
std::vector<int> sample_without_replacement(Rng& rng, int n, int k);

}  // namespace brx
