#pragma once

#include "hasc/losses.hpp"
#include "hasc/samples.hpp"

#include <algorithm>
#include <limits>
#include <optional>

namespace hasc {

struct RealizabilityResult {
    bool realizable = false;
    std::optional<Hypothesis> witness; // a zero-loss member when realizable
};

namespace detail {

inline RealizabilityResult realize_rectangles(const LabeledSample& xy)
{
    const Sample& x = xy.points();
    const int k = x.k;
    const auto kk = static_cast<std::size_t>(k);

    std::vector<double> lo(kk, std::numeric_limits<double>::infinity());
    std::vector<double> hi(kk, -std::numeric_limits<double>::infinity());
    bool any_positive = false;

    const auto* f = xy.labeler();
    const auto* fr = f ? f->get_if<RectangleHypothesis>() : nullptr;
    if (fr) {
        // positives are exactly the product of the per-side sets inside F
        any_positive = !fr->empty && x.size() > 0;
        for (int i = 0; i < k && any_positive; ++i) {
            for (Point p : x.side(i)) {
                if (fr->sides[static_cast<std::size_t>(i)].contains(p)) {
                    lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], p);
                    hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], p);
                }
            }
            any_positive = lo[static_cast<std::size_t>(i)] <= hi[static_cast<std::size_t>(i)];
        }
    } else {
        std::vector<Point> pts(kk);
        for_each_tuple(k, x.size(), [&](std::span<const Index> alpha) {
            if (xy.label(alpha) != 1) {
                return;
            }
            any_positive = true;
            for (std::size_t i = 0; i < kk; ++i) {
                const Point p = x.sides[i][alpha[i]];
                lo[i] = std::min(lo[i], p);
                hi[i] = std::max(hi[i], p);
            }
        });
    }
    if (!any_positive) {
        // the empty box labels everything 0; realizable iff no label differs from 0
        const Hypothesis empty = Hypothesis::empty_box(k);
        if (fr) {
            return {true, empty};
        }
        bool clean = true;
        for_each_tuple(k, x.size(), [&](std::span<const Index> alpha) { clean = clean && xy.label(alpha) == 0; });
        return {clean, clean ? std::optional<Hypothesis>(empty) : std::nullopt};
    }
    RectangleHypothesis box;
    for (std::size_t i = 0; i < kk; ++i) {
        box.sides.push_back({lo[i], hi[i]});
    }
    bool clean = true;
    if (fr) {
        clean = box_disagreements(x, box, *fr) == 0.0;
    } else {
        for_each_tuple(k, x.size(), [&](std::span<const Index> alpha) {
            if (!clean) {
                return;
            }
            bool inside = true;
            for (std::size_t i = 0; i < kk && inside; ++i) {
                inside = box.sides[i].contains(x.sides[i][alpha[i]]);
            }
            if (inside != (xy.label(alpha) == 1)) {
                clean = false;
            }
        });
    }
    if (!clean) {
        return {false, std::nullopt};
    }
    return {true, Hypothesis(std::move(box))};
}

inline RealizabilityResult realize_sum_thresholds(const LabeledSample& xy)
{
    const Sample& x = xy.points();
    const auto& ground = x.side(0);
    double min_pos = std::numeric_limits<double>::infinity();
    double max_neg = -std::numeric_limits<double>::infinity();
    bool bad_label = false;

    const auto* f = xy.labeler();
    const auto* ft = f ? f->get_if<SumThresholdHypothesis>() : nullptr;
    if (ft && x.k == 2) {
        std::vector<Point> v = ground;
        std::sort(v.begin(), v.end());
        const double t = ft->threshold;
        const std::size_t m = v.size();
        // j: first partner after i whose sum reaches t; non-increasing in i
        std::size_t j = m;
        for (std::size_t i = 0; i < m; ++i) {
            while (j > i + 1 && v[i] + v[j - 1] >= t) {
                --j;
            }
            const std::size_t first_pos = std::max(j, i + 1);
            if (first_pos < m && v[i] + v[first_pos] >= t) {
                min_pos = std::min(min_pos, v[i] + v[first_pos]);
            }
            if (first_pos > i + 1) {
                max_neg = std::max(max_neg, v[i] + v[first_pos - 1]);
            } else if (first_pos == i + 1 && first_pos < m && v[i] + v[first_pos] < t) {
                max_neg = std::max(max_neg, v[i] + v[first_pos]);
            }
        }
    } else {
        std::vector<Point> pts(static_cast<std::size_t>(x.k));
        for_each_injective_tuple(x.k, x.size(), [&](std::span<const Index> alpha) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                pts[i] = ground[alpha[i]];
            }
            const double s = point_sum(pts);
            const Label l = xy.label(alpha);
            if (l == 1) {
                min_pos = std::min(min_pos, s);
            } else if (l == 0) {
                max_neg = std::max(max_neg, s);
            } else {
                bad_label = true;
            }
        });
    }
    if (bad_label) {
        return {false, std::nullopt};
    }
    if (std::isinf(min_pos)) {
        return {true, Hypothesis::constant(0)};
    }
    if (min_pos > max_neg) {
        return {true, Hypothesis(SumThresholdHypothesis{min_pos})};
    }
    return {false, std::nullopt};
}

} // namespace detail

/// Decides whether inf over the class of the empirical loss is 0 and returns a
/// zero-loss witness. Boxes: the minimal box around the coordinates of positive
/// tuples, realizable iff no negative tuple lies inside (closed). Thresholds:
/// realizable iff the least positive tuple sum exceeds the greatest negative one.
inline RealizabilityResult erm_realizability_check(const HypothesisClass& cls, const LabeledSample& xy,
                                                   const LossSpec& loss, const OrderChoice* order = nullptr)
{
    if (xy.mode() != cls.mode || xy.arity() != cls.k) {
        throw ModeError("sample does not match the hypothesis class");
    }
    switch (cls.kind) {
    case ClassKind::rectangles:
        if (!loss.is_zero_one()) {
            throw Error("exact box ERM supports the 0/1 loss only");
        }
        return detail::realize_rectangles(xy);
    case ClassKind::sum_thresholds:
        if (!loss.is_zero_one()) {
            throw Error("exact threshold ERM supports the 0/1 loss only");
        }
        return detail::realize_sum_thresholds(xy);
    case ClassKind::finite:
        for (const auto& h : cls.members) {
            if (empirical_loss(xy, h, loss, order) == 0.0) {
                return {true, h};
            }
        }
        return {false, std::nullopt};
    }
    throw Error("unsupported hypothesis class");
}

} // namespace hasc
