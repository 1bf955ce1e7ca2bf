#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace multivar {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Child seed for a named stream, e.g. derive_seed(seed, {replication, subject}).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) noexcept;

}  // namespace multivar
