#pragma once

#include "hasc/core.hpp"
#include "hasc/hypothesis.hpp"
#include "hasc/index_calculus.hpp"
#include "hasc/samples.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hasc {

/// A bounded loss with its declared sup-norm. Partite losses compare single
/// labels; non-partite losses compare orientation bundles indexed by S_k.
class LossSpec {
public:
    using PartiteFn = std::function<double(std::span<const Point>, Label guess, Label truth)>;
    using NonpartiteFn =
        std::function<double(std::span<const Point>, std::span<const Label> guess, std::span<const Label> truth)>;

    static LossSpec zero_one(Mode mode)
    {
        LossSpec l;
        l.mode_ = mode;
        l.sup_norm_ = 1.0;
        l.zero_one_ = true;
        l.name_ = "zero-one";
        l.partite_ = [](std::span<const Point>, Label g, Label t) { return g == t ? 0.0 : 1.0; };
        l.nonpartite_ = [](std::span<const Point>, std::span<const Label> g, std::span<const Label> t) {
            return std::equal(g.begin(), g.end(), t.begin(), t.end()) ? 0.0 : 1.0;
        };
        return l;
    }

    static LossSpec partite(PartiteFn fn, double sup_norm, std::string name)
    {
        check_sup(sup_norm);
        LossSpec l;
        l.mode_ = Mode::partite;
        l.sup_norm_ = sup_norm;
        l.partite_ = std::move(fn);
        l.name_ = std::move(name);
        return l;
    }

    static LossSpec nonpartite(NonpartiteFn fn, double sup_norm, std::string name)
    {
        check_sup(sup_norm);
        LossSpec l;
        l.mode_ = Mode::nonpartite;
        l.sup_norm_ = sup_norm;
        l.nonpartite_ = std::move(fn);
        l.name_ = std::move(name);
        return l;
    }

    Mode mode() const { return mode_; }
    double sup_norm() const { return sup_norm_; }
    bool is_zero_one() const { return zero_one_; }
    const std::string& name() const { return name_; }

    double operator()(std::span<const Point> x, Label guess, Label truth) const
    {
        if (mode_ != Mode::partite) {
            throw ModeError("non-partite loss evaluated on single labels");
        }
        return partite_(x, guess, truth);
    }

    double operator()(std::span<const Point> x, std::span<const Label> guess, std::span<const Label> truth) const
    {
        if (mode_ != Mode::nonpartite) {
            throw ModeError("partite loss evaluated on orientation bundles");
        }
        return nonpartite_(x, guess, truth);
    }

private:
    static void check_sup(double s)
    {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw Error("loss sup-norm must be positive and finite");
        }
    }

    Mode mode_ = Mode::partite;
    double sup_norm_ = 1.0;
    bool zero_one_ = false;
    std::string name_;
    PartiteFn partite_;
    NonpartiteFn nonpartite_;
};

namespace detail {

inline double power(Index m, int k)
{
    double n = 1.0;
    for (int i = 0; i < k; ++i) {
        n *= static_cast<double>(m);
    }
    return n;
}

inline std::uint64_t count_in(const std::vector<Point>& pts, const Interval& a)
{
    return static_cast<std::uint64_t>(std::count_if(pts.begin(), pts.end(), [&](Point p) { return a.contains(p); }));
}

inline std::uint64_t count_in_both(const std::vector<Point>& pts, const Interval& a, const Interval& b)
{
    return static_cast<std::uint64_t>(
        std::count_if(pts.begin(), pts.end(), [&](Point p) { return a.contains(p) && b.contains(p); }));
}

/// Number of [m]^k cells where two box labelings disagree:
/// |A| + |B| - 2|A cap B| with each term a product of per-side counts.
inline double box_disagreements(const Sample& x, const RectangleHypothesis& a, const RectangleHypothesis& b)
{
    double na = a.empty ? 0.0 : 1.0;
    double nb = b.empty ? 0.0 : 1.0;
    double nab = (a.empty || b.empty) ? 0.0 : 1.0;
    for (int i = 0; i < x.k; ++i) {
        const auto& pts = x.side(i);
        const auto si = static_cast<std::size_t>(i);
        if (!a.empty) {
            na *= static_cast<double>(count_in(pts, a.sides[si]));
        }
        if (!b.empty) {
            nb *= static_cast<double>(count_in(pts, b.sides[si]));
        }
        if (!a.empty && !b.empty) {
            nab *= static_cast<double>(count_in_both(pts, a.sides[si], b.sides[si]));
        }
    }
    return na + nb - 2.0 * nab;
}

/// Boxes and the two 0/1 constants seen as boxes (empty, or all of R^k).
inline std::optional<RectangleHypothesis> as_box(const Hypothesis& h, int k)
{
    if (const auto* r = h.get_if<RectangleHypothesis>()) {
        return *r;
    }
    if (const auto* c = h.get_if<ConstantHypothesis>()) {
        if (c->value == 0) {
            return RectangleHypothesis{std::vector<Interval>(static_cast<std::size_t>(k)), true};
        }
        if (c->value == 1) {
            const double inf = std::numeric_limits<double>::infinity();
            return RectangleHypothesis{std::vector<Interval>(static_cast<std::size_t>(k), Interval{-inf, inf}), false};
        }
    }
    return std::nullopt;
}

/// #{i < j : v_i + v_j >= t} for ascending v.
inline std::uint64_t pairs_at_least(std::span<const Point> v, double t)
{
    std::uint64_t count = 0;
    std::size_t i = 0;
    std::size_t j = v.size();
    if (j == 0) {
        return 0;
    }
    --j;
    while (i < j) {
        if (v[i] + v[j] >= t) {
            count += j - i;
            --j;
        } else {
            ++i;
        }
    }
    return count;
}

inline std::optional<double> pair_threshold_of(const Hypothesis& h, std::uint64_t& always)
{
    if (const auto* s = h.get_if<SumThresholdHypothesis>()) {
        return s->threshold;
    }
    if (const auto* c = h.get_if<ConstantHypothesis>()) {
        if (c->value == 1) {
            return -std::numeric_limits<double>::infinity();
        }
        if (c->value == 0) {
            return std::numeric_limits<double>::infinity();
        }
        always = 1;
    }
    return std::nullopt;
}

/// Number of 2-sets whose labels disagree under two threshold-like labelings.
inline std::optional<double> threshold_pair_disagreements(const Sample& x, const Hypothesis& h, const Hypothesis& f)
{
    std::uint64_t unsupported = 0;
    auto th = pair_threshold_of(h, unsupported);
    auto tf = pair_threshold_of(f, unsupported);
    if (!th || !tf || unsupported) {
        return std::nullopt;
    }
    std::vector<Point> v = x.side(0);
    std::sort(v.begin(), v.end());
    const double lo = std::min(*th, *tf);
    const double hi = std::max(*th, *tf);
    return static_cast<double>(pairs_at_least(v, lo) - pairs_at_least(v, hi));
}

} // namespace detail

/// Partite empirical loss: the mean of l(alpha^*(x), H^*_m(x)_alpha, y_alpha) over [m]^k; 0 when m = 0.
inline double empirical_loss_partite(const LabeledSample& xy, const Hypothesis& h, const LossSpec& loss)
{
    if (xy.mode() != Mode::partite || loss.mode() != Mode::partite) {
        throw ModeError("partite empirical loss needs a partite sample and loss");
    }
    const Index m = xy.size();
    if (m == 0) {
        return 0.0;
    }
    const Sample& x = xy.points();
    const double normalizer = detail::power(m, x.k);
    if (loss.is_zero_one()) {
        const auto* f = xy.labeler();
        const auto fr = f ? detail::as_box(*f, x.k) : std::nullopt;
        const auto hr = detail::as_box(h, x.k);
        if (fr && hr) {
            return detail::box_disagreements(x, *hr, *fr) / normalizer;
        }
    }
    double total = 0.0;
    std::vector<Point> pts(static_cast<std::size_t>(x.k));
    const LabelTensor* dense = xy.dense();
    const Hypothesis* f = xy.labeler();
    std::size_t offset = 0;
    for_each_tuple(x.k, m, [&](std::span<const Index> alpha) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = x.sides[i][alpha[i]];
        }
        const Label truth = dense ? dense->cells()[offset++] : (*f)(pts);
        total += loss(pts, h(pts), truth);
    });
    return total / normalizer;
}

/// Non-partite empirical loss under order choice alpha: the mean over k-subsets U
/// of l(alpha_U^*(x), b_alpha(H^*_m(x))_U, b_alpha(y)_U); 0 when m < k.
inline double empirical_loss_nonpartite(const LabeledSample& xy, const Hypothesis& h, const LossSpec& loss,
                                        const OrderChoice& alpha)
{
    if (xy.mode() != Mode::nonpartite || loss.mode() != Mode::nonpartite) {
        throw ModeError("non-partite empirical loss needs a non-partite sample and loss");
    }
    const Index m = xy.size();
    const int k = xy.arity();
    if (m < static_cast<Index>(k)) {
        return 0.0;
    }
    if (alpha.ground_size() != m || alpha.arity() != k) {
        throw IndexError("order choice does not match the sample");
    }
    const double normalizer = static_cast<double>(binomial(m, static_cast<std::uint64_t>(k)));
    const Sample& x = xy.points();
    if (loss.is_zero_one() && k == 2 && xy.labeler()) {
        // symmetric labelings: bundle disagreement is plain label disagreement
        if (auto d = detail::threshold_pair_disagreements(x, h, *xy.labeler())) {
            return *d / normalizer;
        }
    }
    const auto& perms = enumerate_permutations(k);
    const auto& ground = x.side(0);
    std::vector<Label> guess(perms.size());
    std::vector<Label> truth(perms.size());
    std::vector<Index> oriented(static_cast<std::size_t>(k));
    std::vector<Point> pts(static_cast<std::size_t>(k));
    std::vector<Point> base(static_cast<std::size_t>(k));
    double total = 0.0;
    alpha.for_each([&](std::span<const Index>, std::span<const Index> alpha_u) {
        for (std::size_t p = 0; p < perms.size(); ++p) {
            for (std::size_t i = 0; i < oriented.size(); ++i) {
                oriented[i] = alpha_u[static_cast<std::size_t>(perms[p][i])];
                pts[i] = ground[oriented[i]];
            }
            guess[p] = h(pts);
            truth[p] = xy.label(oriented);
        }
        for (std::size_t i = 0; i < base.size(); ++i) {
            base[i] = ground[alpha_u[i]];
        }
        total += loss(base, guess, truth);
    });
    return total / normalizer;
}

/// Empirical loss in either mode; non-partite uses `alpha` or the canonical order choice.
inline double empirical_loss(const LabeledSample& xy, const Hypothesis& h, const LossSpec& loss,
                             const OrderChoice* alpha = nullptr)
{
    if (xy.mode() == Mode::partite) {
        return empirical_loss_partite(xy, h, loss);
    }
    if (alpha) {
        return empirical_loss_nonpartite(xy, h, loss, *alpha);
    }
    return empirical_loss_nonpartite(xy, h, loss, OrderChoice::canonical(xy.size(), xy.arity()));
}

/// l evaluated on one k-tuple drawn from mu^1 (partite) or mu^k (non-partite,
/// comparing the full orientation bundles H^*_k(x) and F^*_k(x)).
inline double pointwise_loss(Mode mode, std::span<const Point> x, const Hypothesis& f, const Hypothesis& h,
                             const LossSpec& loss)
{
    if (mode == Mode::partite) {
        return loss(x, h(x), f(x));
    }
    const auto& perms = enumerate_permutations(static_cast<int>(x.size()));
    std::vector<Label> guess(perms.size());
    std::vector<Label> truth(perms.size());
    std::vector<Point> pts(x.size());
    for (std::size_t p = 0; p < perms.size(); ++p) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = x[static_cast<std::size_t>(perms[p][i])];
        }
        guess[p] = h(pts);
        truth[p] = f(pts);
    }
    return loss(x, guess, truth);
}

struct MonteCarloEstimate {
    double estimate = 0.0;
    double ci = 0.0; // half-width of the 99% interval
    std::uint64_t n_draws = 0;
    std::uint64_t seed = 0;
};

inline constexpr double kCi99 = 2.576;

/// Monte Carlo estimate of the total loss L_{mu,F,l}(H) with a 99% CI half-width.
inline MonteCarloEstimate total_loss_monte_carlo(const ProductMeasure& mu, const Hypothesis& f, const Hypothesis& h,
                                                 const LossSpec& loss, std::uint64_t n_draws, std::uint64_t seed)
{
    if (n_draws < 1) {
        throw Error("total loss estimation needs at least one draw");
    }
    if (mu.mode != loss.mode()) {
        throw ModeError("measure and loss modes differ");
    }
    double mean = 0.0;
    double m2 = 0.0;
    for (std::uint64_t d = 0; d < n_draws; ++d) {
        const auto x = draw_tuple(mu, seed, d);
        const double v = pointwise_loss(mu.mode, x, f, h, loss);
        const double delta = v - mean;
        mean += delta / static_cast<double>(d + 1);
        m2 += delta * (v - mean);
    }
    const double sd = n_draws > 1 ? std::sqrt(m2 / static_cast<double>(n_draws - 1)) : 0.0;
    const double ci = std::min(kCi99 * sd / std::sqrt(static_cast<double>(n_draws)), loss.sup_norm());
    return {mean, ci, n_draws, seed};
}

namespace detail {

inline double clipped_volume(const RectangleHypothesis& r)
{
    if (r.empty) {
        return 0.0;
    }
    double v = 1.0;
    for (const auto& s : r.sides) {
        v *= Interval{std::max(s.lo, 0.0), std::min(s.hi, 1.0)}.length();
    }
    return v;
}

inline double overlap_volume(const RectangleHypothesis& a, const RectangleHypothesis& b)
{
    if (a.empty || b.empty) {
        return 0.0;
    }
    double v = 1.0;
    for (std::size_t i = 0; i < a.sides.size(); ++i) {
        const double lo = std::max({a.sides[i].lo, b.sides[i].lo, 0.0});
        const double hi = std::min({a.sides[i].hi, b.sides[i].hi, 1.0});
        v *= Interval{lo, hi}.length();
    }
    return v;
}

} // namespace detail

/// Exact 0/1 total loss of two boxes (or 0/1 constants) under uniform sides: the volume of their
/// symmetric difference.
inline double total_loss_exact_rectangles(const ProductMeasure& mu, const Hypothesis& f, const Hypothesis& h)
{
    const auto fr = detail::as_box(f, mu.k);
    const auto hr = detail::as_box(h, mu.k);
    if (mu.mode != Mode::partite || !mu.all_uniform() || !fr || !hr
        || (!fr->empty && fr->sides.size() != static_cast<std::size_t>(mu.k))
        || (!hr->empty && hr->sides.size() != static_cast<std::size_t>(mu.k))) {
        throw Error("exact rectangle loss needs uniform partite sides and two boxes of matching arity");
    }
    return detail::clipped_volume(*fr) + detail::clipped_volume(*hr) - 2.0 * detail::overlap_volume(*fr, *hr);
}

/// P(U_1 + ... + U_k <= s) for i.i.d. Uniform(0,1).
inline double irwin_hall_cdf(int k, double s)
{
    if (s <= 0.0) {
        return 0.0;
    }
    if (s >= k) {
        return 1.0;
    }
    double total = 0.0;
    double factorial = 1.0;
    for (int i = 2; i <= k; ++i) {
        factorial *= i;
    }
    for (int j = 0; j <= static_cast<int>(std::floor(s)); ++j) {
        const double term = static_cast<double>(binomial(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j)))
                            * std::pow(s - j, k);
        total += (j % 2 == 0) ? term : -term;
    }
    return std::clamp(total / factorial, 0.0, 1.0);
}

/// Exact 0/1 total loss of two sum-threshold (or constant) hypotheses under a
/// uniform non-partite measure: P(min(t_F, t_H) <= S < max(t_F, t_H)).
inline double total_loss_exact_sum_thresholds(const ProductMeasure& mu, const Hypothesis& f, const Hypothesis& h)
{
    std::uint64_t unsupported = 0;
    auto tf = detail::pair_threshold_of(f, unsupported);
    auto th = detail::pair_threshold_of(h, unsupported);
    if (mu.mode != Mode::nonpartite || !mu.all_uniform() || !tf || !th || unsupported) {
        throw Error("exact threshold loss needs a uniform non-partite measure and threshold hypotheses");
    }
    const auto cdf = [&](double t) {
        if (std::isinf(t)) {
            return t < 0 ? 0.0 : 1.0;
        }
        return irwin_hall_cdf(mu.k, t);
    };
    return std::abs(cdf(*tf) - cdf(*th));
}

/// Exact total loss when a closed form applies (0/1 loss, uniform measure, boxes or thresholds).
inline std::optional<double> exact_total_loss(const ProductMeasure& mu, const Hypothesis& f, const Hypothesis& h,
                                              const LossSpec& loss)
{
    if (!loss.is_zero_one() || !mu.all_uniform()) {
        return std::nullopt;
    }
    if (mu.mode == Mode::partite && detail::as_box(f, mu.k) && detail::as_box(h, mu.k)) {
        return total_loss_exact_rectangles(mu, f, h);
    }
    std::uint64_t unsupported = 0;
    if (mu.mode == Mode::nonpartite && detail::pair_threshold_of(f, unsupported)
        && detail::pair_threshold_of(h, unsupported) && !unsupported) {
        return total_loss_exact_sum_thresholds(mu, f, h);
    }
    return std::nullopt;
}

} // namespace hasc
