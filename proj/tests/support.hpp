#pragma once

// Random generators shared by the test suites.

#include "hasc/hasc.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace hasc::testing {

inline std::vector<Index> random_injection(CounterRng& rng, Index s, Index m)
{
    std::vector<Index> pool(m);
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index i = 0; i < s; ++i) {
        std::swap(pool[i], pool[i + rng.below(m - i)]);
    }
    pool.resize(s);
    return pool;
}

inline InjectionVector random_injection_vector(CounterRng& rng, Mode mode, int k, Index s, Index m)
{
    InjectionVector iv{mode, s, m, {}};
    const int maps = mode == Mode::partite ? k : 1;
    for (int i = 0; i < maps; ++i) {
        iv.maps.push_back(random_injection(rng, s, m));
    }
    return iv;
}

/// Points on a coarse grid so ties and boundary cases show up.
inline Sample random_grid_sample(CounterRng& rng, Mode mode, int k, Index m, int grid = 8)
{
    Sample x = empty_sample(mode, k);
    for (auto& side : x.sides) {
        side.resize(m);
        for (auto& p : side) {
            p = static_cast<double>(rng.below(static_cast<std::uint64_t>(grid) + 1)) / grid;
        }
    }
    return x;
}

/// A random table hypothesis over the grid points, asymmetric in general.
inline Hypothesis random_table(CounterRng& rng, int k, int grid = 8)
{
    TableHypothesis t;
    t.fallback = static_cast<Label>(rng.below(2));
    std::vector<Point> key(static_cast<std::size_t>(k));
    for_each_tuple(k, static_cast<Index>(grid) + 1, [&](std::span<const Index> a) {
        if (rng.below(2) == 0) {
            return;
        }
        for (std::size_t i = 0; i < key.size(); ++i) {
            key[i] = static_cast<double>(a[i]) / grid;
        }
        t.table[key] = static_cast<Label>(rng.below(2));
    });
    return t;
}

inline Hypothesis random_box(CounterRng& rng, int k, int grid = 8)
{
    RectangleHypothesis r;
    for (int i = 0; i < k; ++i) {
        double a = static_cast<double>(rng.below(static_cast<std::uint64_t>(grid) + 1)) / grid;
        double b = static_cast<double>(rng.below(static_cast<std::uint64_t>(grid) + 1)) / grid;
        r.sides.push_back({std::min(a, b), std::max(a, b)});
    }
    return r;
}

/// Any of the built-in hypothesis shapes, chosen at random.
inline Hypothesis random_hypothesis(CounterRng& rng, int k, int grid = 8)
{
    switch (rng.below(4)) {
    case 0: return random_box(rng, k, grid);
    case 1: return SumThresholdHypothesis{rng.uniform() * k};
    case 2: return Hypothesis::constant(static_cast<Label>(rng.below(2)));
    default: return random_table(rng, k, grid);
    }
}

} // namespace hasc::testing
