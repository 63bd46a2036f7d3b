#pragma once

// Point distributions, sample generation, labeled samples and hypothesis classes.

#include "hasc/core.hpp"
#include "hasc/hypothesis.hpp"
#include "hasc/index_calculus.hpp"
#include "hasc/random.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hasc {

/// Uniform(0,1) or a finite discrete pmf over real support values.
class Distribution {
public:
    static Distribution uniform() { return Distribution{}; }

    static Distribution discrete(std::vector<double> support, std::vector<double> weights)
    {
        if (support.empty() || support.size() != weights.size()) {
            throw Error("discrete distribution needs matching non-empty support and weights");
        }
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) {
                throw Error("discrete distribution weights must be nonnegative");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw Error("discrete distribution weights must sum to 1");
        }
        Distribution d;
        d.uniform_ = false;
        d.support_ = std::move(support);
        d.weights_ = std::move(weights);
        d.cumulative_.resize(d.weights_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < d.weights_.size(); ++i) {
            acc += d.weights_[i];
            d.cumulative_[i] = acc;
        }
        d.cumulative_.back() = 1.0;
        return d;
    }

    bool is_uniform() const { return uniform_; }
    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Inverse-CDF transform of 64 random bits.
    double draw(std::uint64_t bits) const
    {
        const double u = to_unit_interval(bits);
        if (uniform_) {
            return u;
        }
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        if (it == cumulative_.end()) {
            --it;
        }
        return support_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    bool operator==(const Distribution&) const = default;

private:
    bool uniform_ = true;
    std::vector<double> support_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
};

/// mu = (mu_1, ..., mu_k) in partite mode, a single mu in non-partite mode.
struct ProductMeasure {
    Mode mode = Mode::partite;
    int k = 1;
    std::vector<Distribution> sides;

    static ProductMeasure uniform(Mode mode, int k)
    {
        return ProductMeasure{mode, k, std::vector<Distribution>(mode == Mode::partite ? static_cast<std::size_t>(k) : 1)};
    }

    const Distribution& side(int i) const
    {
        return mode == Mode::partite ? sides.at(static_cast<std::size_t>(i)) : sides.at(0);
    }

    bool all_uniform() const
    {
        return std::all_of(sides.begin(), sides.end(), [](const Distribution& d) { return d.is_uniform(); });
    }

    void check() const
    {
        const std::size_t expected = mode == Mode::partite ? static_cast<std::size_t>(k) : 1;
        if (k < 1 || sides.size() != expected) {
            throw Error("product measure needs " + std::to_string(expected) + " side distributions");
        }
    }
};

/// Point `index` of list `side` is a pure function of (seed, side, index).
inline Point draw_point(const Distribution& d, std::uint64_t seed, std::uint64_t side, std::uint64_t index)
{
    return d.draw(derive_seed(seed, {side, index}));
}

/// x ~ mu^m.
inline Sample draw_sample(const ProductMeasure& mu, Index m, std::uint64_t seed)
{
    mu.check();
    Sample x = empty_sample(mu.mode, mu.k);
    for (std::size_t s = 0; s < x.sides.size(); ++s) {
        const auto& d = mu.side(static_cast<int>(s));
        x.sides[s].resize(m);
        for (Index i = 0; i < m; ++i) {
            x.sides[s][i] = draw_point(d, seed, s, i);
        }
    }
    return x;
}

/// One draw from mu^1 (partite) or mu^k (non-partite): a k-tuple of points.
inline std::vector<Point> draw_tuple(const ProductMeasure& mu, std::uint64_t seed, std::uint64_t draw)
{
    std::vector<Point> x(static_cast<std::size_t>(mu.k));
    for (int i = 0; i < mu.k; ++i) {
        x[static_cast<std::size_t>(i)] = mu.side(i).draw(derive_seed(seed, {draw, static_cast<std::uint64_t>(i)}));
    }
    return x;
}

/// F^*_m(x): the dense label tensor of F on the sample.
inline LabelTensor label_sample(const Hypothesis& f, const Sample& x, std::vector<Label> alphabet = {0, 1},
                                std::size_t cell_budget = kDefaultCellBudget)
{
    x.check();
    LabelTensor y(x.mode, x.k, x.size(), std::move(alphabet), cell_budget);
    std::vector<Point> pts(static_cast<std::size_t>(x.k));
    for_each_tuple(x.k, x.size(), [&](std::span<const Index> alpha) {
        if (!y.cell_valid(alpha)) {
            return;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = x.side(static_cast<int>(i))[alpha[i]];
        }
        y.set(alpha, f(pts));
    });
    return y;
}

/// Labels defined as F^*_m(x) and evaluated on demand.
struct ImplicitLabels {
    Hypothesis labeler;
    std::vector<Label> alphabet{0, 1};
};

/// (x, y) with y either a dense tensor or implicit F^*_m(x).
class LabeledSample {
public:
    LabeledSample() = default;

    LabeledSample(Sample x, LabelTensor y) : x_(std::move(x)), labels_(std::move(y))
    {
        x_.check();
        const auto& t = std::get<LabelTensor>(labels_);
        if (t.mode() != x_.mode || t.arity() != x_.k || t.size() != x_.size()) {
            throw Error("label tensor shape does not match the sample");
        }
    }

    LabeledSample(Sample x, ImplicitLabels y) : x_(std::move(x)), labels_(std::move(y)) { x_.check(); }

    const Sample& points() const { return x_; }
    Mode mode() const { return x_.mode; }
    int arity() const { return x_.k; }
    Index size() const { return x_.size(); }

    bool is_dense() const { return std::holds_alternative<LabelTensor>(labels_); }
    const LabelTensor* dense() const { return std::get_if<LabelTensor>(&labels_); }

    /// The labeling hypothesis when labels are implicit, else nullptr.
    const Hypothesis* labeler() const
    {
        const auto* imp = std::get_if<ImplicitLabels>(&labels_);
        return imp ? &imp->labeler : nullptr;
    }

    const std::vector<Label>& alphabet() const
    {
        if (const auto* t = dense()) {
            return t->alphabet();
        }
        return std::get<ImplicitLabels>(labels_).alphabet;
    }

    Label label(std::span<const Index> alpha) const
    {
        if (const auto* t = dense()) {
            return t->at(alpha);
        }
        return std::get<ImplicitLabels>(labels_).labeler(alpha_star_point(x_, alpha));
    }

    LabelTensor materialize(std::size_t cell_budget = kDefaultCellBudget) const
    {
        if (const auto* t = dense()) {
            return *t;
        }
        const auto& imp = std::get<ImplicitLabels>(labels_);
        return label_sample(imp.labeler, x_, imp.alphabet, cell_budget);
    }

private:
    Sample x_;
    std::variant<LabelTensor, ImplicitLabels> labels_;
};

inline LabeledSample label_lazily(const Hypothesis& f, Sample x, std::vector<Label> alphabet = {0, 1})
{
    return LabeledSample(std::move(x), ImplicitLabels{f, std::move(alphabet)});
}

/// alpha^#(x, y) (partite) / alpha^*(x, y) (non-partite); the subsample is always dense.
inline LabeledSample alpha_sharp(const LabeledSample& xy, const InjectionVector& alpha)
{
    Sample sub = alpha_sharp(xy.points(), alpha);
    if (const auto* t = xy.dense()) {
        return LabeledSample(std::move(sub), alpha_sharp(*t, alpha));
    }
    // Equivariance: alpha^#(F^*_m(x)) = F^*_s(alpha^#(x)).
    LabelTensor y = label_sample(*xy.labeler(), sub, xy.alphabet());
    return LabeledSample(std::move(sub), std::move(y));
}

enum class ClassKind { rectangles, sum_thresholds, finite };

inline std::string to_string(ClassKind kind)
{
    switch (kind) {
    case ClassKind::rectangles: return "rectangles";
    case ClassKind::sum_thresholds: return "sum-threshold";
    case ClassKind::finite: return "finite";
    }
    return "?";
}

/// Built-in hypothesis classes: closed boxes in [0,1]^k (partite), coordinate
/// sum thresholds on [0,1] (non-partite), or an explicit finite list.
struct HypothesisClass {
    ClassKind kind = ClassKind::rectangles;
    Mode mode = Mode::partite;
    int k = 1;
    std::vector<Hypothesis> members;

    static HypothesisClass rectangles(int k) { return {ClassKind::rectangles, Mode::partite, k, {}}; }
    static HypothesisClass sum_thresholds(int k) { return {ClassKind::sum_thresholds, Mode::nonpartite, k, {}}; }
    static HypothesisClass finite(Mode mode, int k, std::vector<Hypothesis> members)
    {
        if (members.empty()) {
            throw Error("finite hypothesis class must not be empty");
        }
        return {ClassKind::finite, mode, k, std::move(members)};
    }

    bool contains(const Hypothesis& h) const
    {
        switch (kind) {
        case ClassKind::rectangles:
            if (const auto* r = h.get_if<RectangleHypothesis>()) {
                return r->sides.size() == static_cast<std::size_t>(k);
            }
            return false;
        case ClassKind::sum_thresholds:
            // constants are the thresholds at -inf / +inf
            return h.get_if<SumThresholdHypothesis>() != nullptr
                   || (h.get_if<ConstantHypothesis>() && (h.get_if<ConstantHypothesis>()->value == 0
                                                          || h.get_if<ConstantHypothesis>()->value == 1));
        case ClassKind::finite:
            return std::find(members.begin(), members.end(), h) != members.end();
        }
        return false;
    }
};

/// Draws a target F from the class: box corners uniform on [0,1] then sorted;
/// thresholds uniform on [0,k]; finite classes uniformly over members.
inline Hypothesis draw_hypothesis(const HypothesisClass& cls, std::uint64_t seed)
{
    CounterRng rng(seed);
    switch (cls.kind) {
    case ClassKind::rectangles: {
        RectangleHypothesis r;
        for (int i = 0; i < cls.k; ++i) {
            double a = rng.uniform();
            double b = rng.uniform();
            r.sides.push_back({std::min(a, b), std::max(a, b)});
        }
        return r;
    }
    case ClassKind::sum_thresholds:
        return SumThresholdHypothesis{rng.uniform() * cls.k};
    case ClassKind::finite:
        return cls.members[rng.below(cls.members.size())];
    }
    return Hypothesis{};
}

} // namespace hasc
