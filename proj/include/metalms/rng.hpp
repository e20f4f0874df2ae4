#pragma once

#include <cstdint>
#include <random>

namespace metalms {

using Rng = std::mt19937_64;

// Seed for sub-stream `index` of `master`. Streams are addressed by
// (master, index, purpose) so adding trajectories never shifts earlier ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t purpose = 0);

Rng make_stream(std::uint64_t master, std::uint64_t index, std::uint64_t purpose = 0);

double standard_normal(Rng& rng);
double uniform(Rng& rng, double lo, double hi);

}  // namespace metalms
