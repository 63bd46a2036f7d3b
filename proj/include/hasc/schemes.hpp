#pragma once

// Selection schemes (sigma, eta, rho), the compression map kappa, compression
// size/bitlength, the built-in schemes and validity checkers.

#include "hasc/losses.hpp"
#include "hasc/realizability.hpp"
#include "hasc/samples.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace hasc {

/// A selection scheme. `select` returns sigma_m(x, y) as an injection vector of
/// size s_m, `header` returns eta_m(x, y) in {1, ..., h_m}, `rebuild` is rho_m.
struct SelectionScheme {
    std::string name;
    Mode mode = Mode::partite;
    int k = 1;
    bool proper = false;
    std::function<Index(Index)> selection_size;
    std::function<std::size_t(Index)> header_size;
    std::function<InjectionVector(const LabeledSample&)> select;
    std::function<std::size_t(const LabeledSample&)> header;
    std::function<Hypothesis(const LabeledSample&, std::size_t)> rebuild;
    /// Optional sigma and eta in one pass, for schemes where both need the same search.
    std::function<std::pair<InjectionVector, std::size_t>(const LabeledSample&)> select_with_header;
};

/// Output of kappa_m: the selected subsample and the header, plus the selection
/// that produced it and the original size (for reporting only).
struct Compressed {
    LabeledSample subsample;
    std::size_t header = 1;
    InjectionVector selection;
    Index m = 0;
};

inline void check_compatible(const SelectionScheme& scheme, const LabeledSample& xy)
{
    if (scheme.mode != xy.mode() || scheme.k != xy.arity()) {
        throw ModeError("scheme '" + scheme.name + "' (" + to_string(scheme.mode) + ", k=" + std::to_string(scheme.k)
                        + ") does not match the sample (" + to_string(xy.mode()) + ", k="
                        + std::to_string(xy.arity()) + ")");
    }
}

/// kappa_m(x, y) = (sigma_m(x, y)^#(x, y), eta_m(x, y)).
inline Compressed kappa(const SelectionScheme& scheme, const LabeledSample& xy)
{
    check_compatible(scheme, xy);
    const Index m = xy.size();
    const Index s = scheme.selection_size(m);
    if (s > m) {
        throw IndexError("selection size exceeds the sample size");
    }
    InjectionVector sigma;
    std::size_t eta = 1;
    if (scheme.select_with_header) {
        std::tie(sigma, eta) = scheme.select_with_header(xy);
    } else {
        sigma = scheme.select(xy);
        eta = scheme.header(xy);
    }
    if (sigma.mode != xy.mode() || sigma.domain != s || sigma.codomain != m) {
        throw IndexError("selector of '" + scheme.name + "' returned an injection of the wrong shape");
    }
    sigma.check(xy.arity());
    if (eta < 1 || eta > scheme.header_size(m)) {
        throw IndexError("header " + std::to_string(eta) + " outside [" + std::to_string(scheme.header_size(m)) + "]");
    }
    LabeledSample sub = alpha_sharp(xy, sigma);
    return {std::move(sub), eta, std::move(sigma), m};
}

/// rho_m(subsample, header) for a sample of original size m.
inline Hypothesis reconstruct(const SelectionScheme& scheme, const LabeledSample& subsample, std::size_t header,
                              Index m)
{
    check_compatible(scheme, subsample);
    if (subsample.size() != scheme.selection_size(m)) {
        throw IndexError("subsample size does not match s_m");
    }
    if (header < 1 || header > scheme.header_size(m)) {
        throw IndexError("header " + std::to_string(header) + " outside [" + std::to_string(scheme.header_size(m))
                         + "]");
    }
    return scheme.rebuild(subsample, header);
}

inline Hypothesis reconstruct(const SelectionScheme& scheme, const Compressed& c)
{
    return reconstruct(scheme, c.subsample, c.header, c.m);
}

struct CompressionSize {
    double log2_size = 0.0; // b_S(m)
    double size = 1.0;      // c_S(m), +inf when not representable
};

/// c_S(m) = h_m |Y|^{s_m^k} (partite) or h_m |Y|^{(s_m)_k} (non-partite), in log space.
inline CompressionSize compression_size_and_bitlength(const SelectionScheme& scheme, Index m, std::size_t alphabet_size)
{
    const Index s = scheme.selection_size(m);
    double exponent = 0.0;
    if (scheme.mode == Mode::partite) {
        exponent = std::pow(static_cast<double>(s), scheme.k);
    } else {
        exponent = 1.0;
        for (int i = 0; i < scheme.k; ++i) {
            exponent *= static_cast<double>(s >= static_cast<Index>(i) ? s - static_cast<Index>(i) : 0);
        }
    }
    const double bits = std::log2(static_cast<double>(scheme.header_size(m)))
                        + exponent * std::log2(static_cast<double>(alphabet_size));
    return {bits, std::exp2(bits)};
}

namespace detail {

inline InjectionVector prefix_selection(Mode mode, int k, Index m, Index s)
{
    InjectionVector iv{mode, s, m, {}};
    std::vector<Index> prefix(s);
    std::iota(prefix.begin(), prefix.end(), Index{0});
    iv.maps.assign(mode == Mode::partite ? static_cast<std::size_t>(k) : 1, prefix);
    return iv;
}

/// Per side, the indices of the least and greatest coordinate among points that
/// participate in some positive tuple (smallest index on ties). Empty if no
/// tuple is positive.
struct Extremes {
    std::vector<Index> argmin;
    std::vector<Index> argmax;
};

inline std::optional<Extremes> positive_extremes(const LabeledSample& xy)
{
    const Sample& x = xy.points();
    const auto kk = static_cast<std::size_t>(x.k);
    Extremes e{std::vector<Index>(kk), std::vector<Index>(kk)};
    const auto better_min = [&](std::size_t side, Index cand, Index cur) {
        const Point a = x.sides[side][cand];
        const Point b = x.sides[side][cur];
        return a < b || (a == b && cand < cur);
    };
    const auto better_max = [&](std::size_t side, Index cand, Index cur) {
        const Point a = x.sides[side][cand];
        const Point b = x.sides[side][cur];
        return a > b || (a == b && cand < cur);
    };

    const auto* f = xy.labeler();
    const auto* fr = f ? f->get_if<RectangleHypothesis>() : nullptr;
    if (fr) {
        if (fr->empty) {
            return std::nullopt;
        }
        for (std::size_t i = 0; i < kk; ++i) {
            bool found = false;
            for (Index j = 0; j < x.size(); ++j) {
                if (!fr->sides[i].contains(x.sides[i][j])) {
                    continue;
                }
                if (!found) {
                    e.argmin[i] = e.argmax[i] = j;
                    found = true;
                    continue;
                }
                if (better_min(i, j, e.argmin[i])) {
                    e.argmin[i] = j;
                }
                if (better_max(i, j, e.argmax[i])) {
                    e.argmax[i] = j;
                }
            }
            if (!found) {
                return std::nullopt;
            }
        }
        return e;
    }

    bool found = false;
    for_each_tuple(x.k, x.size(), [&](std::span<const Index> alpha) {
        if (xy.label(alpha) != 1) {
            return;
        }
        for (std::size_t i = 0; i < kk; ++i) {
            if (!found || better_min(i, alpha[i], e.argmin[i])) {
                e.argmin[i] = alpha[i];
            }
            if (!found || better_max(i, alpha[i], e.argmax[i])) {
                e.argmax[i] = alpha[i];
            }
        }
        found = true;
    });
    if (!found) {
        return std::nullopt;
    }
    return e;
}

/// The positive k-set of least coordinate sum, as an increasing index tuple
/// (lexicographically smallest on ties). Positivity is read at the increasing
/// orientation.
inline std::optional<std::vector<Index>> least_positive_set(const LabeledSample& xy)
{
    const Sample& x = xy.points();
    const auto& ground = x.side(0);
    const auto* f = xy.labeler();
    const auto* ft = f ? f->get_if<SumThresholdHypothesis>() : nullptr;
    if (ft && x.k == 2) {
        const Index m = ground.size();
        std::vector<Point> v = ground;
        std::sort(v.begin(), v.end());
        const double t = ft->threshold;
        // for ascending i the first partner reaching t moves left; collect the
        // value pairs of least positive sum
        double best = std::numeric_limits<double>::infinity();
        std::vector<std::pair<Point, Point>> attaining;
        Index j = m;
        for (Index i = 0; i < m; ++i) {
            while (j > i + 1 && v[i] + v[j - 1] >= t) {
                --j;
            }
            const Index cand = std::max(j, i + 1);
            if (cand >= m || v[i] + v[cand] < t) {
                continue;
            }
            const double sum = v[i] + v[cand];
            if (sum < best) {
                best = sum;
                attaining.clear();
            }
            if (sum == best && (attaining.empty() || attaining.back() != std::pair{v[i], v[cand]})) {
                attaining.emplace_back(v[i], v[cand]);
            }
        }
        if (attaining.empty()) {
            return std::nullopt;
        }
        // smallest index pair whose values form one of those pairs
        std::optional<std::vector<Index>> found;
        for (const auto& [p, q] : attaining) {
            std::vector<Index> with_p;
            std::vector<Index> with_q;
            for (Index a = 0; a < m && (with_p.size() < 2 || with_q.size() < 2); ++a) {
                if (ground[a] == p && with_p.size() < 2) {
                    with_p.push_back(a);
                }
                if (ground[a] == q && with_q.size() < 2) {
                    with_q.push_back(a);
                }
            }
            std::vector<Index> pair;
            if (p == q) {
                pair = with_p;
            } else {
                pair = {std::min(with_p.front(), with_q.front()), std::max(with_p.front(), with_q.front())};
            }
            if (!found || pair < *found) {
                found = std::move(pair);
            }
        }
        return found;
    }

    std::optional<std::vector<Index>> best_set;
    double best = std::numeric_limits<double>::infinity();
    std::vector<Point> pts(static_cast<std::size_t>(x.k));
    for_each_subset(x.size(), x.k, [&](std::span<const Index> u) {
        if (xy.label(u) != 1) {
            return;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = ground[u[i]];
        }
        const double s = point_sum(pts);
        if (!best_set || s < best) {
            best = s;
            best_set.emplace(u.begin(), u.end());
        }
    });
    return best_set;
}

} // namespace detail

/// s_m = m, h_m = 1; rho returns the exact ERM witness of `cls` on the full sample.
inline SelectionScheme trivial_scheme(const HypothesisClass& cls, const LossSpec& loss)
{
    SelectionScheme s;
    s.name = "trivial";
    s.mode = cls.mode;
    s.k = cls.k;
    s.proper = true;
    s.selection_size = [](Index m) { return m; };
    s.header_size = [](Index) { return std::size_t{1}; };
    const int k = cls.k;
    const Mode mode = cls.mode;
    s.select = [mode, k](const LabeledSample& xy) { return InjectionVector::identity(mode, k, xy.size()); };
    s.header = [](const LabeledSample&) { return std::size_t{1}; };
    s.rebuild = [cls, loss](const LabeledSample& sub, std::size_t) {
        auto r = erm_realizability_check(cls, sub, loss);
        if (r.witness) {
            return *r.witness;
        }
        return cls.kind == ClassKind::finite ? cls.members.front() : Hypothesis::constant(0);
    };
    return s;
}

/// Partite box scheme: per side the indices of the extreme coordinates among
/// positive-participating points (s_m = 2, h_m = 2); header 2 flags a sample
/// without positive tuples.
inline SelectionScheme rectangle_scheme(int k)
{
    SelectionScheme s;
    s.name = "rectangle";
    s.mode = Mode::partite;
    s.k = k;
    s.proper = true;
    s.selection_size = [](Index m) { return m < 2 ? m : Index{2}; };
    s.header_size = [](Index) { return std::size_t{2}; };
    s.select_with_header = [k](const LabeledSample& xy) {
        const Index m = xy.size();
        const Index sm = m < 2 ? m : 2;
        auto e = detail::positive_extremes(xy);
        const std::size_t header = e ? 1 : 2;
        if (!e || sm < 2) {
            return std::pair{detail::prefix_selection(Mode::partite, k, m, sm), header};
        }
        InjectionVector iv{Mode::partite, 2, m, {}};
        for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
            const Index lo = e->argmin[i];
            const Index hi = e->argmax[i];
            iv.maps.push_back(lo != hi ? std::vector<Index>{lo, hi} : std::vector<Index>{lo, lo == 0 ? Index{1} : 0});
        }
        return std::pair{std::move(iv), header};
    };
    s.select = [joint = s.select_with_header](const LabeledSample& xy) { return joint(xy).first; };
    s.header = [joint = s.select_with_header](const LabeledSample& xy) { return joint(xy).second; };
    s.rebuild = [k](const LabeledSample& sub, std::size_t header) {
        if (header == 2) {
            return Hypothesis::empty_box(k);
        }
        // box around the selected points that take part in a positive subsample tuple
        const auto kk = static_cast<std::size_t>(k);
        std::vector<double> lo(kk, std::numeric_limits<double>::infinity());
        std::vector<double> hi(kk, -std::numeric_limits<double>::infinity());
        bool any = false;
        for_each_tuple(k, sub.size(), [&](std::span<const Index> beta) {
            if (sub.label(beta) != 1) {
                return;
            }
            any = true;
            for (std::size_t i = 0; i < kk; ++i) {
                lo[i] = std::min(lo[i], sub.points().sides[i][beta[i]]);
                hi[i] = std::max(hi[i], sub.points().sides[i][beta[i]]);
            }
        });
        if (!any) {
            return Hypothesis::empty_box(k);
        }
        RectangleHypothesis box;
        for (std::size_t i = 0; i < kk; ++i) {
            box.sides.push_back({lo[i], hi[i]});
        }
        return Hypothesis(std::move(box));
    };
    return s;
}

/// Non-partite threshold scheme: selects the positive k-set of least coordinate
/// sum (s_m = k, h_m = 2); rho predicts 1 iff the sum reaches that set's sum.
inline SelectionScheme sum_threshold_scheme(int k)
{
    SelectionScheme s;
    s.name = "sum-threshold";
    s.mode = Mode::nonpartite;
    s.k = k;
    s.proper = true;
    const auto kk = static_cast<Index>(k);
    s.selection_size = [kk](Index m) { return m < kk ? m : kk; };
    s.header_size = [](Index) { return std::size_t{2}; };
    s.select_with_header = [k, kk](const LabeledSample& xy) {
        const Index m = xy.size();
        auto best = m < kk ? std::nullopt : detail::least_positive_set(xy);
        if (!best) {
            return std::pair{detail::prefix_selection(Mode::nonpartite, k, m, m < kk ? m : kk), std::size_t{2}};
        }
        return std::pair{InjectionVector{Mode::nonpartite, kk, m, {*best}}, std::size_t{1}};
    };
    s.select = [joint = s.select_with_header](const LabeledSample& xy) { return joint(xy).first; };
    s.header = [joint = s.select_with_header](const LabeledSample& xy) { return joint(xy).second; };
    s.rebuild = [](const LabeledSample& sub, std::size_t header) {
        if (header == 2) {
            return Hypothesis::constant(0);
        }
        return Hypothesis(SumThresholdHypothesis{point_sum(sub.points().side(0))});
    };
    return s;
}

/// s_m = 0, h_m = 1; rho ignores its input and returns a constant.
inline SelectionScheme constant_scheme(Mode mode, int k, Label value)
{
    SelectionScheme s;
    s.name = "constant-" + std::to_string(value);
    s.mode = mode;
    s.k = k;
    s.selection_size = [](Index) { return Index{0}; };
    s.header_size = [](Index) { return std::size_t{1}; };
    s.select = [mode, k](const LabeledSample& xy) { return detail::prefix_selection(mode, k, xy.size(), 0); };
    s.header = [](const LabeledSample&) { return std::size_t{1}; };
    s.rebuild = [value](const LabeledSample&, std::size_t) { return Hypothesis::constant(value); };
    return s;
}

// ---------------------------------------------------------------------------
// Validity checking

struct CompressionReport {
    std::uint64_t trial = 0;
    Index m = 0;
    Index s_m = 0;
    std::size_t h_m = 1;
    InjectionVector selection;
    std::size_t header = 1;
    std::string hypothesis;
    double empirical_loss = 0.0; // worst over the order choices tried
    double threshold = 0.0;      // epsilon_m; 0 for exact validity
    std::string order_choice;    // the worst order choice (non-partite)
    bool violation = false;
    std::vector<Index> offending_cell;
};

struct ValidityOptions {
    std::uint64_t trials = 200;
    std::vector<Index> m_values;
    std::uint64_t seed = 0;
    std::optional<ProductMeasure> measure; // uniform when unset
    int random_order_choices = 5;
    bool fail_fast = false;
    /// Materialize label tensors up to this many cells; larger samples keep implicit labels.
    std::size_t dense_cell_limit = 1'000'000;
};

struct ValidityReport {
    std::vector<CompressionReport> records;
    std::size_t violations = 0;
    std::size_t trials_run = 0;
    bool ok() const { return violations == 0; }
};

class HarnessError : public Error {
public:
    using Error::Error;
};

/// A realizable labeled sample: F drawn from the class, x ~ mu^m, y = F^*_m(x).
inline LabeledSample realizable_sample(const HypothesisClass& cls, const ProductMeasure& mu, Index m,
                                       std::uint64_t seed, std::size_t dense_cell_limit, Hypothesis* target = nullptr)
{
    Hypothesis f = draw_hypothesis(cls, derive_seed(seed, {0}));
    Sample x = draw_sample(mu, m, derive_seed(seed, {1}));
    if (target) {
        *target = f;
    }
    bool dense = true;
    try {
        LabelTensor::checked_cell_count(cls.k, m, dense_cell_limit);
    } catch (const BudgetError&) {
        dense = false;
    }
    if (dense) {
        LabelTensor y = label_sample(f, x);
        return LabeledSample(std::move(x), std::move(y));
    }
    return label_lazily(f, std::move(x));
}

namespace detail {

inline std::vector<Index> first_offending_cell(const LabeledSample& xy, const Hypothesis& h, const LossSpec& loss,
                                               const OrderChoice* alpha)
{
    const Sample& x = xy.points();
    std::vector<Index> found;
    std::vector<Point> pts(static_cast<std::size_t>(x.k));
    if (xy.mode() == Mode::partite) {
        for_each_tuple(x.k, x.size(), [&](std::span<const Index> a) {
            if (!found.empty()) {
                return;
            }
            for (std::size_t i = 0; i < pts.size(); ++i) {
                pts[i] = x.sides[i][a[i]];
            }
            if (loss(pts, h(pts), xy.label(a)) > 0.0) {
                found.assign(a.begin(), a.end());
            }
        });
        return found;
    }
    const auto& perms = enumerate_permutations(x.k);
    std::vector<Label> guess(perms.size());
    std::vector<Label> truth(perms.size());
    std::vector<Index> oriented(pts.size());
    alpha->for_each([&](std::span<const Index>, std::span<const Index> au) {
        if (!found.empty()) {
            return;
        }
        for (std::size_t p = 0; p < perms.size(); ++p) {
            for (std::size_t i = 0; i < pts.size(); ++i) {
                oriented[i] = au[static_cast<std::size_t>(perms[p][i])];
                pts[i] = x.side(0)[oriented[i]];
            }
            guess[p] = h(pts);
            truth[p] = xy.label(oriented);
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = x.side(0)[au[i]];
        }
        if (loss(pts, guess, truth) > 0.0) {
            found.assign(au.begin(), au.end());
        }
    });
    return found;
}

} // namespace detail

/// Runs rho o kappa on realizable samples and flags any whose empirical loss
/// exceeds eps(m) (non-partite: under the canonical and several random order
/// choices). Exact validity is eps = 0.
inline ValidityReport check_approximate_validity(const SelectionScheme& scheme, const HypothesisClass& cls,
                                                 const LossSpec& loss, const std::function<double(Index)>& eps,
                                                 const ValidityOptions& opt)
{
    if (scheme.mode != cls.mode || scheme.k != cls.k || loss.mode() != cls.mode) {
        throw ModeError("scheme, class and loss must share mode and arity");
    }
    const ProductMeasure mu = opt.measure.value_or(ProductMeasure::uniform(cls.mode, cls.k));
    ValidityReport report;
    for (Index m : opt.m_values) {
        for (std::uint64_t t = 0; t < opt.trials; ++t) {
            const std::uint64_t trial_seed = derive_seed(opt.seed, {m, t});
            LabeledSample xy = realizable_sample(cls, mu, m, trial_seed, opt.dense_cell_limit);
            const OrderChoice canonical = OrderChoice::canonical(m, cls.k);
            if (!erm_realizability_check(cls, xy, loss, &canonical).realizable) {
                throw HarnessError("generated sample is not realizable (m=" + std::to_string(m) + ", trial "
                                   + std::to_string(t) + ")");
            }
            Compressed c = kappa(scheme, xy);
            Hypothesis h = reconstruct(scheme, c);

            CompressionReport rec;
            rec.trial = t;
            rec.m = m;
            rec.s_m = scheme.selection_size(m);
            rec.h_m = scheme.header_size(m);
            rec.header = c.header;
            rec.selection = c.selection;
            rec.hypothesis = h.summary();
            rec.threshold = eps(m);

            const OrderChoice* worst = nullptr;
            std::vector<OrderChoice> choices;
            if (cls.mode == Mode::partite) {
                rec.empirical_loss = empirical_loss_partite(xy, h, loss);
            } else {
                choices.push_back(canonical);
                for (int r = 0; r < opt.random_order_choices; ++r) {
                    choices.push_back(OrderChoice::random(m, cls.k, derive_seed(trial_seed, {2, static_cast<std::uint64_t>(r)})));
                }
                rec.empirical_loss = -1.0;
                for (std::size_t i = 0; i < choices.size(); ++i) {
                    const double l = empirical_loss_nonpartite(xy, h, loss, choices[i]);
                    if (l > rec.empirical_loss) {
                        rec.empirical_loss = l;
                        rec.order_choice = i == 0 ? "canonical" : "random-" + std::to_string(i - 1);
                        worst = &choices[i];
                    }
                }
            }
            rec.violation = rec.empirical_loss > rec.threshold;
            if (rec.violation) {
                rec.offending_cell = detail::first_offending_cell(xy, h, loss, worst);
                ++report.violations;
            }
            ++report.trials_run;
            report.records.push_back(std::move(rec));
            if (report.violations > 0 && opt.fail_fast) {
                return report;
            }
        }
    }
    return report;
}

inline ValidityReport check_compression_validity(const SelectionScheme& scheme, const HypothesisClass& cls,
                                                 const LossSpec& loss, const ValidityOptions& opt)
{
    return check_approximate_validity(scheme, cls, loss, [](Index) { return 0.0; }, opt);
}

} // namespace hasc
