#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace hasc {

// SplitMix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives a child key from `key` and a path of counters, e.g.
/// derive_seed(master, {trial, side, index}).
constexpr std::uint64_t derive_seed(std::uint64_t key, std::initializer_list<std::uint64_t> path)
{
    std::uint64_t h = mix64(key);
    for (std::uint64_t c : path) {
        h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
    }
    return h;
}

inline double to_unit_interval(std::uint64_t bits)
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based generator: the n-th output is a pure function of (key, n),
/// so streams for different (seed, side, index, trial) keys never interact.
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : key_(mix64(key)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return mix64(key_ ^ mix64(counter_++)); }

    double uniform() { return to_unit_interval((*this)()); }

    /// Uniform integer in [0, n), n > 0 (Lemire's nearly-divisionless method).
    std::uint64_t below(std::uint64_t n)
    {
        __uint128_t product = static_cast<__uint128_t>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(product);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                product = static_cast<__uint128_t>((*this)()) * n;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace hasc
