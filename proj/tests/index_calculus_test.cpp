#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hasc;
using hasc::testing::random_grid_sample;
using hasc::testing::random_hypothesis;
using hasc::testing::random_injection_vector;

namespace {

Sample partite2(std::vector<Point> a, std::vector<Point> b)
{
    Sample x = empty_sample(Mode::partite, 2);
    x.sides = {std::move(a), std::move(b)};
    return x;
}

std::vector<Index> idx(std::initializer_list<Index> v)
{
    return v;
}

} // namespace

TEST(FallingFactorial, SmallValues)
{
    EXPECT_EQ(falling_factorial(5, 2), 20u);
    EXPECT_EQ(falling_factorial(3, 4), 0u);
    EXPECT_EQ(falling_factorial(7, 0), 1u);
    EXPECT_EQ(falling_factorial(0, 0), 1u);
    EXPECT_EQ(falling_factorial(10, 10), 3628800u);
}

TEST(FallingFactorial, OverflowIsAnError)
{
    EXPECT_THROW(falling_factorial(1'000'000, 10), std::overflow_error);
}

TEST(Binomial, MatchesPascal)
{
    for (std::uint64_t n = 0; n < 30; ++n) {
        for (std::uint64_t k = 1; k <= n; ++k) {
            EXPECT_EQ(binomial(n, k), binomial(n - 1, k - 1) + binomial(n - 1, k)) << n << " " << k;
        }
    }
    EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(KTuple, RangeAndInjectivityChecks)
{
    KTuple ok{{0, 2, 1}, 3, true};
    EXPECT_NO_THROW(ok.check());
    KTuple out_of_range{{0, 3}, 3, false};
    EXPECT_THROW(out_of_range.check(), IndexError);
    KTuple repeated{{1, 1}, 3, true};
    EXPECT_THROW(repeated.check(), IndexError);
    repeated.injective = false;
    EXPECT_NO_THROW(repeated.check());
}

TEST(AlphaStarPoint, PartiteSelectsOneCoordinatePerSide)
{
    // x = ((a, b), (c, d)), alpha = (1, 0) -> (b, c)
    const Sample x = partite2({1.0, 2.0}, {3.0, 4.0});
    EXPECT_EQ(alpha_star_point(x, idx({1, 0})), (std::vector<Point>{2.0, 3.0}));
    EXPECT_EQ(alpha_star_point(x, idx({0, 0})), (std::vector<Point>{1.0, 3.0}));
}

TEST(AlphaStarPoint, NonpartiteRejectsRepeatedIndex)
{
    Sample x = empty_sample(Mode::nonpartite, 2);
    x.sides = {{0.1, 0.2, 0.3}};
    EXPECT_THROW(alpha_star_point(x, idx({0, 0})), IndexError);
    EXPECT_EQ(alpha_star_point(x, idx({2, 0})), (std::vector<Point>{0.3, 0.1}));
}

TEST(AlphaStarPoint, OutOfRange)
{
    const Sample x = partite2({1.0, 2.0}, {3.0, 4.0});
    EXPECT_THROW(alpha_star_point(x, idx({2, 0})), IndexError);
    EXPECT_THROW(alpha_star_point(x, idx({0})), IndexError);
}

TEST(EnumeratePermutations, IdentityFirstAndCounts)
{
    EXPECT_EQ(enumerate_permutations(1), (std::vector<Permutation>{{0}}));
    EXPECT_EQ(enumerate_permutations(2), (std::vector<Permutation>{{0, 1}, {1, 0}}));
    EXPECT_EQ(enumerate_permutations(3).size(), 6u);
    EXPECT_EQ(enumerate_permutations(8).size(), 40320u);
    EXPECT_THROW(enumerate_permutations(0), Error);
    EXPECT_THROW(enumerate_permutations(9), Error);
}

TEST(ForEachTuple, RowMajorOrder)
{
    std::vector<std::vector<Index>> seen;
    for_each_tuple(2, 3, [&](std::span<const Index> a) { seen.emplace_back(a.begin(), a.end()); });
    ASSERT_EQ(seen.size(), 9u);
    EXPECT_EQ(seen[0], idx({0, 0}));
    EXPECT_EQ(seen[1], idx({0, 1}));
    EXPECT_EQ(seen[3], idx({1, 0}));
    EXPECT_EQ(seen[8], idx({2, 2}));
}

TEST(ForEachSubset, LexicographicAndRanked)
{
    std::uint64_t expected_rank = 0;
    std::size_t count = 0;
    std::vector<Index> prev;
    for_each_subset(7, 3, [&](std::span<const Index> u) {
        std::vector<Index> cur(u.begin(), u.end());
        EXPECT_TRUE(std::is_sorted(cur.begin(), cur.end()));
        if (!prev.empty()) {
            EXPECT_LT(prev, cur);
        }
        EXPECT_EQ(subset_rank(u, 7), expected_rank++);
        prev = cur;
        ++count;
    });
    EXPECT_EQ(count, binomial(7, 3));
}

TEST(CanonicalOrderChoice, SortedOrientation)
{
    const OrderChoice c = canonical_order_choice(4, 2);
    EXPECT_EQ(c.injection_for(idx({0, 2})), idx({0, 2}));
    EXPECT_EQ(c.size(), 6u);

    const OrderChoice single = canonical_order_choice(3, 3);
    std::size_t count = 0;
    single.for_each([&](std::span<const Index> u, std::span<const Index> a) {
        EXPECT_EQ(std::vector<Index>(a.begin(), a.end()), idx({0, 1, 2}));
        EXPECT_EQ(std::vector<Index>(u.begin(), u.end()), idx({0, 1, 2}));
        ++count;
    });
    EXPECT_EQ(count, 1u);

    std::size_t none = 0;
    canonical_order_choice(2, 3).for_each([&](auto, auto) { ++none; });
    EXPECT_EQ(none, 0u);
}

TEST(OrderChoice, RandomChoicesHaveImageU)
{
    const OrderChoice c = OrderChoice::random(7, 3, 99);
    std::size_t count = 0;
    c.for_each([&](std::span<const Index> u, std::span<const Index> a) {
        std::vector<Index> sorted(a.begin(), a.end());
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(sorted, std::vector<Index>(u.begin(), u.end()));
        EXPECT_EQ(c.injection_for(u), std::vector<Index>(a.begin(), a.end()));
        ++count;
    });
    EXPECT_EQ(count, c.size());
}

TEST(OrderChoice, FromInjectionsRoundTrip)
{
    const OrderChoice c = OrderChoice::random(5, 2, 3);
    std::vector<std::vector<Index>> inj;
    c.for_each([&](auto, std::span<const Index> a) { inj.emplace_back(a.begin(), a.end()); });
    const OrderChoice d = OrderChoice::from_injections(5, 2, inj);
    std::vector<std::vector<Index>> again;
    d.for_each([&](auto, std::span<const Index> a) { again.emplace_back(a.begin(), a.end()); });
    EXPECT_EQ(inj, again);

    inj[0] = {0, 2};
    EXPECT_THROW(OrderChoice::from_injections(5, 2, inj), IndexError);
}

TEST(LabelTensor, SentinelOnDiagonal)
{
    LabelTensor y(Mode::nonpartite, 2, 3, {0, 1});
    for_each_tuple(2, 3, [&](std::span<const Index> a) {
        if (a[0] == a[1]) {
            EXPECT_EQ(y.cells()[y.offset(a)], kSentinel);
            EXPECT_FALSE(y.cell_valid(a));
            EXPECT_THROW(y.at(a), IndexError);
        } else {
            EXPECT_EQ(y.at(a), 0);
        }
    });
    EXPECT_THROW(y.set(idx({1, 1}), 1), IndexError);
    EXPECT_THROW(y.set(idx({0, 1}), 5), Error);
}

TEST(LabelTensor, BudgetGuard)
{
    EXPECT_THROW(LabelTensor(Mode::partite, 3, 1000, {0, 1}, 1000), BudgetError);
    EXPECT_THROW(LabelTensor::checked_cell_count(2, 20000, kDefaultCellBudget), BudgetError);
    EXPECT_EQ(LabelTensor::checked_cell_count(2, 10000, kDefaultCellBudget), 100'000'000u);
}

TEST(LabelTensor, FromCellsValidates)
{
    EXPECT_NO_THROW(LabelTensor::from_cells(Mode::nonpartite, 2, 2, {0, 1}, {kSentinel, 1, 0, kSentinel}));
    EXPECT_THROW(LabelTensor::from_cells(Mode::nonpartite, 2, 2, {0, 1}, {0, 1, 0, kSentinel}), Error);
    EXPECT_THROW(LabelTensor::from_cells(Mode::partite, 2, 2, {0, 1}, {0, 1, 0}), Error);
}

TEST(AlphaSharp, IdentityIsIdentity)
{
    CounterRng rng(5);
    for (Mode mode : {Mode::partite, Mode::nonpartite}) {
        for (int k = 1; k <= 3; ++k) {
            const Index m = 4;
            const Sample x = random_grid_sample(rng, mode, k, m);
            const LabelTensor y = label_sample(random_hypothesis(rng, k), x);
            const auto id = InjectionVector::identity(mode, k, m);
            EXPECT_EQ(alpha_sharp(x, id).sides, x.sides);
            EXPECT_EQ(alpha_sharp(y, id), y);
        }
    }
}

TEST(AlphaSharp, ReversedSelectionCells)
{
    // m = 3, both sides select (2, 0): result cell (0, 1) is y at (2, 0)
    const Sample x = partite2({0.1, 0.2, 0.3}, {0.4, 0.5, 0.6});
    LabelTensor y(Mode::partite, 2, 3, {0, 1, 2, 3});
    Label next = 0;
    for_each_tuple(2, 3, [&](std::span<const Index> a) { y.set(a, next++ % 4); });
    const InjectionVector alpha{Mode::partite, 2, 3, {{2, 0}, {2, 0}}};
    const Sample sub = alpha_sharp(x, alpha);
    EXPECT_EQ(sub.sides[0], (std::vector<Point>{0.3, 0.1}));
    EXPECT_EQ(sub.sides[1], (std::vector<Point>{0.6, 0.4}));
    const LabelTensor ys = alpha_sharp(y, alpha);
    EXPECT_EQ(ys.at(idx({0, 0})), y.at(idx({2, 2})));
    EXPECT_EQ(ys.at(idx({0, 1})), y.at(idx({2, 0})));
    EXPECT_EQ(ys.at(idx({1, 0})), y.at(idx({0, 2})));
    EXPECT_EQ(ys.at(idx({1, 1})), y.at(idx({0, 0})));
}

TEST(AlphaSharp, EmptySelection)
{
    const Sample x = partite2({0.1, 0.2}, {0.3, 0.4});
    const InjectionVector alpha{Mode::partite, 0, 2, {{}, {}}};
    const Sample sub = alpha_sharp(x, alpha);
    EXPECT_EQ(sub.size(), 0u);
    LabelTensor y(Mode::partite, 2, 2, {0, 1});
    EXPECT_EQ(alpha_sharp(y, alpha).cell_count(), 0u);
}

TEST(AlphaSharp, RejectsNonInjectiveMaps)
{
    const Sample x = partite2({0.1, 0.2}, {0.3, 0.4});
    const InjectionVector bad{Mode::partite, 2, 2, {{0, 0}, {0, 1}}};
    EXPECT_THROW(alpha_sharp(x, bad), IndexError);
}

// alpha^#(F^*_m(x)) = F^*_n(alpha^#(x)), exactly, in both modes.
TEST(Equivariance, LabelingCommutesWithSubsampling)
{
    CounterRng rng(17);
    for (Mode mode : {Mode::partite, Mode::nonpartite}) {
        for (int k = 1; k <= 3; ++k) {
            for (int trial = 0; trial < 100; ++trial) {
                const Index m = 1 + rng.below(8);
                const Index n = rng.below(m + 1);
                const Sample x = random_grid_sample(rng, mode, k, m);
                const Hypothesis f = random_hypothesis(rng, k);
                const auto alpha = random_injection_vector(rng, mode, k, n, m);
                EXPECT_EQ(alpha_sharp(label_sample(f, x), alpha), label_sample(f, alpha_sharp(x, alpha)));
            }
        }
    }
}

// beta^# o alpha^# = (alpha o beta)^#.
TEST(Equivariance, CompositionIsContravariant)
{
    CounterRng rng(23);
    for (Mode mode : {Mode::partite, Mode::nonpartite}) {
        for (int k = 1; k <= 3; ++k) {
            for (int trial = 0; trial < 40; ++trial) {
                const Index m = 1 + rng.below(6);
                const Index n = rng.below(m + 1);
                const Index p = rng.below(n + 1);
                const Sample x = random_grid_sample(rng, mode, k, m);
                const LabelTensor y = label_sample(random_hypothesis(rng, k), x);
                const auto alpha = random_injection_vector(rng, mode, k, n, m);
                const auto beta = random_injection_vector(rng, mode, k, p, n);
                const auto composed = compose(alpha, beta);
                EXPECT_EQ(alpha_sharp(alpha_sharp(x, alpha), beta).sides, alpha_sharp(x, composed).sides);
                EXPECT_EQ(alpha_sharp(alpha_sharp(y, alpha), beta), alpha_sharp(y, composed));
            }
        }
    }
}

TEST(BundleOrientations, SingleSet)
{
    LabelTensor y(Mode::nonpartite, 2, 2, {0, 1});
    y.set(idx({0, 1}), 1);
    y.set(idx({1, 0}), 0);
    const auto b = bundle_orientations(y, canonical_order_choice(2, 2));
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].labels, (std::vector<Label>{1, 0}));
}

TEST(BundleOrientations, ReversedOrientation)
{
    // U = {0, 2} with alpha_U = (2, 0): identity slot holds y at (2, 0)
    LabelTensor y(Mode::nonpartite, 2, 3, {0, 1, 2});
    y.set(idx({2, 0}), 2);
    y.set(idx({0, 2}), 1);
    std::vector<std::vector<Index>> inj{{0, 1}, {2, 0}, {1, 2}};
    const auto b = bundle_orientations(y, OrderChoice::from_injections(3, 2, inj));
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[1].subset, idx({0, 2}));
    EXPECT_EQ(b[1].labels, (std::vector<Label>{2, 1}));
}

TEST(BundleOrientations, ShapeAndConstantTensor)
{
    for (int k = 1; k <= 4; ++k) {
        const Index m = 6;
        LabelTensor y(Mode::nonpartite, k, m, {0, 7}, kDefaultCellBudget);
        for_each_injective_tuple(k, m, [&](std::span<const Index> a) { y.set(a, 7); });
        const auto b = bundle_orientations(y, OrderChoice::random(m, k, 4));
        EXPECT_EQ(b.size(), binomial(m, static_cast<std::uint64_t>(k)));
        for (const auto& bundle : b) {
            EXPECT_EQ(bundle.labels.size(), enumerate_permutations(k).size());
            for (Label l : bundle.labels) {
                EXPECT_EQ(l, 7);
            }
        }
    }
}
