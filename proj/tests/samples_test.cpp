#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace hasc;
using hasc::testing::random_box;
using hasc::testing::random_grid_sample;

namespace {

Sample partite2(std::vector<Point> a, std::vector<Point> b)
{
    Sample x = empty_sample(Mode::partite, 2);
    x.sides = {std::move(a), std::move(b)};
    return x;
}

LabeledSample dense_from_cells(Sample x, std::vector<Label> cells)
{
    const Mode mode = x.mode;
    const int k = x.k;
    const Index m = x.size();
    return LabeledSample(std::move(x), LabelTensor::from_cells(mode, k, m, {0, 1}, std::move(cells)));
}

// Every box with corners on sample coordinates, plus the empty box.
bool brute_force_box_realizable(const LabeledSample& xy)
{
    const Sample& x = xy.points();
    std::vector<std::vector<Interval>> per_side(static_cast<std::size_t>(x.k));
    for (int i = 0; i < x.k; ++i) {
        for (Point a : x.side(i)) {
            for (Point b : x.side(i)) {
                if (a <= b) {
                    per_side[static_cast<std::size_t>(i)].push_back({a, b});
                }
            }
        }
    }
    const auto fits = [&](const Hypothesis& h) {
        bool ok = true;
        for_each_tuple(x.k, x.size(), [&](std::span<const Index> a) {
            ok = ok && h(alpha_star_point(x, a)) == xy.label(a);
        });
        return ok;
    };
    if (fits(Hypothesis::empty_box(x.k))) {
        return true;
    }
    std::vector<std::size_t> choice(per_side.size(), 0);
    for (;;) {
        RectangleHypothesis r;
        for (std::size_t i = 0; i < choice.size(); ++i) {
            r.sides.push_back(per_side[i][choice[i]]);
        }
        if (fits(r)) {
            return true;
        }
        std::size_t i = 0;
        while (i < choice.size() && ++choice[i] == per_side[i].size()) {
            choice[i++] = 0;
        }
        if (i == choice.size()) {
            return false;
        }
    }
}

} // namespace

TEST(DrawSample, EmptyAndDeterministic)
{
    const auto mu = ProductMeasure::uniform(Mode::partite, 3);
    EXPECT_EQ(draw_sample(mu, 0, 1).size(), 0u);
    const Sample a = draw_sample(mu, 50, 42);
    const Sample b = draw_sample(mu, 50, 42);
    const Sample c = draw_sample(mu, 50, 43);
    EXPECT_EQ(a.sides, b.sides);
    EXPECT_NE(a.sides, c.sides);
    for (const auto& side : a.sides) {
        for (Point p : side) {
            EXPECT_GE(p, 0.0);
            EXPECT_LT(p, 1.0);
        }
    }
}

TEST(DrawSample, PrefixStable)
{
    // a point depends only on (seed, side, index)
    const auto mu = ProductMeasure::uniform(Mode::nonpartite, 2);
    const Sample small = draw_sample(mu, 10, 8);
    const Sample large = draw_sample(mu, 100, 8);
    EXPECT_TRUE(std::equal(small.side(0).begin(), small.side(0).end(), large.side(0).begin()));
}

TEST(DrawSample, PointMass)
{
    ProductMeasure mu{Mode::nonpartite, 2, {Distribution::discrete({0.25}, {1.0})}};
    const Sample x = draw_sample(mu, 5, 3);
    for (Point p : x.side(0)) {
        EXPECT_EQ(p, 0.25);
    }
}

TEST(Distribution, RejectsBadWeights)
{
    EXPECT_THROW(Distribution::discrete({0.1, 0.2}, {0.5, 0.4}), Error);
    EXPECT_THROW(Distribution::discrete({0.1, 0.2}, {1.5, -0.5}), Error);
    EXPECT_THROW(Distribution::discrete({0.1}, {0.5, 0.5}), Error);
    EXPECT_NO_THROW(Distribution::discrete({0.1, 0.2}, {0.5, 0.5 + 1e-13}));
}

TEST(Distribution, DiscreteFrequencies)
{
    const std::vector<double> weights{0.1, 0.2, 0.3, 0.4};
    ProductMeasure mu{Mode::nonpartite, 1, {Distribution::discrete({0.0, 1.0, 2.0, 3.0}, weights)}};
    const Index n = 100'000;
    const Sample x = draw_sample(mu, n, 2024);
    std::vector<double> counts(4, 0.0);
    for (Point p : x.side(0)) {
        counts[static_cast<std::size_t>(p)] += 1.0;
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double p = weights[i];
        EXPECT_LE(std::abs(counts[i] / n - p), 3.0 * std::sqrt(p * (1 - p) / n)) << "atom " << i;
    }
}

TEST(LabelSample, ConstantHypothesisGivesConstantTensor)
{
    CounterRng rng(1);
    const Sample x = random_grid_sample(rng, Mode::partite, 3, 4);
    const LabelTensor y = label_sample(Hypothesis::constant(1), x);
    for (Label l : y.cells()) {
        EXPECT_EQ(l, 1);
    }
}

TEST(LabelSample, HandRectangle)
{
    // F = [0,.5]^2 on x = ((0.1, 0.9), (0.2, 0.8)) -> [1, 0; 0, 0]
    RectangleHypothesis f{{{0.0, 0.5}, {0.0, 0.5}}, false};
    const LabelTensor y = label_sample(f, partite2({0.1, 0.9}, {0.2, 0.8}));
    EXPECT_EQ(std::vector<Label>(y.cells().begin(), y.cells().end()), (std::vector<Label>{1, 0, 0, 0}));
}

TEST(LabelSample, NonpartiteBelowArity)
{
    Sample x = empty_sample(Mode::nonpartite, 3);
    x.sides = {{0.1, 0.2}};
    const LabelTensor y = label_sample(SumThresholdHypothesis{0.0}, x);
    for (Label l : y.cells()) {
        EXPECT_EQ(l, kSentinel);
    }
}

TEST(LabeledSample, ImplicitMatchesDense)
{
    CounterRng rng(4);
    for (Mode mode : {Mode::partite, Mode::nonpartite}) {
        const Sample x = random_grid_sample(rng, mode, 2, 6);
        const Hypothesis f = hasc::testing::random_hypothesis(rng, 2);
        const LabeledSample lazy = label_lazily(f, x);
        const LabeledSample dense(x, label_sample(f, x));
        EXPECT_EQ(lazy.materialize(), dense.materialize());
        for_each_injective_tuple(2, 6, [&](std::span<const Index> a) { EXPECT_EQ(lazy.label(a), dense.label(a)); });
    }
}

TEST(Realizability, AllNegativeGivesEmptyBox)
{
    const auto xy = dense_from_cells(partite2({0.1, 0.2}, {0.3, 0.4}), {0, 0, 0, 0});
    const auto r = erm_realizability_check(HypothesisClass::rectangles(2), xy, LossSpec::zero_one(Mode::partite));
    ASSERT_TRUE(r.realizable);
    ASSERT_TRUE(r.witness);
    EXPECT_EQ(empirical_loss(xy, *r.witness, LossSpec::zero_one(Mode::partite)), 0.0);
    for_each_tuple(2, 2, [&](std::span<const Index> a) { EXPECT_EQ((*r.witness)(alpha_star_point(xy.points(), a)), 0); });
}

TEST(Realizability, NegativeInsideMinimalBox)
{
    // positives (0.2, 0.3) and (0.4, 0.1); the negative (0.3, 0.2) lies in [0.2,0.4] x [0.1,0.3]
    const Sample x = partite2({0.2, 0.4, 0.3}, {0.3, 0.1, 0.2});
    LabelTensor y(Mode::partite, 2, 3, {0, 1});
    y.set(std::vector<Index>{0, 0}, 1);
    y.set(std::vector<Index>{1, 1}, 1);
    const LabeledSample xy(x, y);
    const auto r = erm_realizability_check(HypothesisClass::rectangles(2), xy, LossSpec::zero_one(Mode::partite));
    EXPECT_FALSE(r.realizable);
    EXPECT_FALSE(brute_force_box_realizable(xy));
}

TEST(Realizability, ClassMemberLabelsAreRealizable)
{
    CounterRng rng(9);
    const auto loss = LossSpec::zero_one(Mode::partite);
    for (int trial = 0; trial < 50; ++trial) {
        const Sample x = random_grid_sample(rng, Mode::partite, 2, 5);
        const LabeledSample xy(x, label_sample(random_box(rng, 2), x));
        const auto r = erm_realizability_check(HypothesisClass::rectangles(2), xy, loss);
        ASSERT_TRUE(r.realizable);
        EXPECT_EQ(empirical_loss(xy, *r.witness, loss), 0.0);
    }
}

TEST(Realizability, AgreesWithBruteForceBoxes)
{
    CounterRng rng(31);
    const auto cls = HypothesisClass::rectangles(2);
    const auto loss = LossSpec::zero_one(Mode::partite);
    int realizable = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Index m = 1 + rng.below(4);
        const Sample x = random_grid_sample(rng, Mode::partite, 2, m, 4);
        LabelTensor y(Mode::partite, 2, m, {0, 1});
        for_each_tuple(2, m, [&](std::span<const Index> a) { y.set(a, static_cast<Label>(rng.below(4) == 0)); });
        const LabeledSample xy(x, y);
        const bool fast = erm_realizability_check(cls, xy, loss).realizable;
        EXPECT_EQ(fast, brute_force_box_realizable(xy)) << "trial " << trial;
        realizable += fast;
    }
    EXPECT_GT(realizable, 20);
}

TEST(Realizability, ThresholdsAgreeWithBruteForce)
{
    CounterRng rng(37);
    const auto cls = HypothesisClass::sum_thresholds(2);
    const auto loss = LossSpec::zero_one(Mode::nonpartite);
    for (int trial = 0; trial < 300; ++trial) {
        const Index m = 2 + rng.below(4);
        const Sample x = random_grid_sample(rng, Mode::nonpartite, 2, m, 4);
        LabelTensor y(Mode::nonpartite, 2, m, {0, 1});
        for_each_subset(m, 2, [&](std::span<const Index> u) {
            const Label l = static_cast<Label>(rng.below(2));
            y.set(u, l);
            y.set(std::vector<Index>{u[1], u[0]}, l);
        });
        const LabeledSample xy(x, y);
        // candidates: constants and every attained pair sum
        bool brute = false;
        std::vector<Hypothesis> candidates{Hypothesis::constant(0), Hypothesis::constant(1)};
        for_each_subset(m, 2, [&](std::span<const Index> u) {
            candidates.push_back(SumThresholdHypothesis{x.side(0)[u[0]] + x.side(0)[u[1]]});
        });
        for (const auto& h : candidates) {
            brute = brute || empirical_loss(xy, h, loss) == 0.0;
        }
        EXPECT_EQ(erm_realizability_check(cls, xy, loss).realizable, brute) << "trial " << trial;
    }
}

TEST(Realizability, ImplicitFastPathsMatchDense)
{
    CounterRng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const Index m = 2 + rng.below(12);
        {
            const Sample x = random_grid_sample(rng, Mode::partite, 2, m, 6);
            const Hypothesis f = random_box(rng, 2, 6);
            const auto cls = HypothesisClass::rectangles(2);
            const auto loss = LossSpec::zero_one(Mode::partite);
            const auto lazy = erm_realizability_check(cls, label_lazily(f, x), loss);
            const auto dense = erm_realizability_check(cls, LabeledSample(x, label_sample(f, x)), loss);
            EXPECT_EQ(lazy.realizable, dense.realizable);
            EXPECT_EQ(lazy.witness, dense.witness);
        }
        {
            const Sample x = random_grid_sample(rng, Mode::nonpartite, 2, m, 6);
            const Hypothesis f = SumThresholdHypothesis{static_cast<double>(rng.below(13)) / 6.0};
            const auto cls = HypothesisClass::sum_thresholds(2);
            const auto loss = LossSpec::zero_one(Mode::nonpartite);
            const auto lazy = erm_realizability_check(cls, label_lazily(f, x), loss);
            const auto dense = erm_realizability_check(cls, LabeledSample(x, label_sample(f, x)), loss);
            EXPECT_TRUE(lazy.realizable);
            EXPECT_EQ(lazy.witness, dense.witness);
        }
    }
}

TEST(HypothesisClass, Membership)
{
    const auto boxes = HypothesisClass::rectangles(2);
    EXPECT_TRUE(boxes.contains(RectangleHypothesis{{{0, 1}, {0, 1}}, false}));
    EXPECT_FALSE(boxes.contains(RectangleHypothesis{{{0, 1}}, false}));
    EXPECT_FALSE(boxes.contains(SumThresholdHypothesis{1.0}));
    const auto thresholds = HypothesisClass::sum_thresholds(2);
    EXPECT_TRUE(thresholds.contains(SumThresholdHypothesis{1.0}));
    EXPECT_TRUE(thresholds.contains(Hypothesis::constant(0)));
    const auto finite = HypothesisClass::finite(Mode::partite, 1, {Hypothesis::constant(1)});
    EXPECT_TRUE(finite.contains(Hypothesis::constant(1)));
    EXPECT_FALSE(finite.contains(Hypothesis::constant(0)));
}

TEST(Serialization, SampleRoundTripIsBitExact)
{
    CounterRng rng(2);
    for (Mode mode : {Mode::partite, Mode::nonpartite}) {
        const auto mu = ProductMeasure::uniform(mode, 2);
        const Sample x = draw_sample(mu, 5, 77);
        const LabeledSample xy(x, label_sample(hasc::testing::random_hypothesis(rng, 2), x));
        const json j = sample_to_json(xy);
        const LabeledSample back = labeled_sample_from_json(json::parse(j.dump()));
        EXPECT_EQ(back.points().sides, x.sides);
        EXPECT_EQ(back.materialize(), xy.materialize());
    }
}

TEST(Serialization, SentinelText)
{
    Sample x = empty_sample(Mode::nonpartite, 2);
    x.sides = {{0.5, 0.25}};
    const LabelTensor y = label_sample(Hypothesis::constant(1), x);
    const json j = sample_to_json(x, {0, 1}, &y);
    EXPECT_EQ(j.at("labels").at(0), "·");
    EXPECT_EQ(j.at("labels").at(1), 1);
    EXPECT_EQ(j.at("m"), 2);
}

TEST(Serialization, SizeMismatchRejected)
{
    json j{{"mode", "partite"}, {"k", 1}, {"m", 3}, {"points", {{0.1, 0.2}}}};
    EXPECT_THROW(sample_from_json(j), Error);
}
