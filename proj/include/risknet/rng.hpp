#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace risknet {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Folds a list of integers into a single 64-bit seed. Order matters.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Seeded random stream. All draws are implemented on top of the raw 64-bit
/// engine output so results are identical across standard library vendors.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent child stream keyed by (seed, stream). Does not advance this one.
    Rng split(std::uint64_t stream) const;

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform01();
    /// Uniform on (0, 1].
    double uniform_open_closed();
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n).
    std::uint64_t index(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace risknet
