#pragma once

// The learner rho o kappa, the Azuma tail bound for a fixed (sigma, eta), the
// union-bounded failure probability and the resulting sample-size guarantee.

#include "hasc/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

namespace hasc {

/// A(x, y) = rho_m(kappa_m(x, y)).
inline Hypothesis learn(const SelectionScheme& scheme, const LabeledSample& xy)
{
    return reconstruct(scheme, kappa(scheme, xy));
}

struct GuaranteeInputs {
    Mode mode = Mode::partite;
    int k = 1;
    double loss_sup = 1.0;
    double epsilon = 0.1;
    double delta = 0.1;
    std::function<Index(Index)> selection_size;
    std::function<std::size_t(Index)> header_size;

    static GuaranteeInputs for_scheme(const SelectionScheme& scheme, double loss_sup, double epsilon, double delta)
    {
        return {scheme.mode, scheme.k, loss_sup, epsilon, delta, scheme.selection_size, scheme.header_size};
    }

    void check() const
    {
        if (!(epsilon > 0.0 && epsilon < 1.0)) {
            throw Error("epsilon must lie in (0, 1)");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            throw Error("delta must lie in (0, 1)");
        }
        if (!(loss_sup > 0.0) || !std::isfinite(loss_sup)) {
            throw Error("loss sup-norm must be positive and finite");
        }
        if (k < 1) {
            throw Error("arity must be at least 1");
        }
        if (!selection_size || !header_size) {
            throw Error("selection and header size sequences are required");
        }
    }
};

struct BoundBreakdown {
    Mode mode = Mode::partite;
    int k = 1;
    Index m = 0;
    Index s = 0;
    std::size_t h = 1;
    double epsilon = 0.0;
    double slack = 0.0;     // (1 - (m-s)^k/m^k) ||l|| or (1 - (m-s)_k/(m)_k) ||l||
    double eps_tilde = 0.0; // epsilon - slack; 0 when the condition fails
    double log_single = 0.0;
    double single_event_bound = 1.0;
    double log_multiplier = 0.0; // ln((m)_s^k h) or ln((m)_s h)
    double multiplier = 1.0;
    double log_total = 0.0;
    double total_bound = 1.0; // multiplier * single, clamped to [0, 1]
    bool condition_violated = false;
};

/// ln (n)_s.
inline double log_falling_factorial(Index n, Index s)
{
    if (s > n) {
        return -std::numeric_limits<double>::infinity();
    }
    if (s <= 64) {
        double acc = 0.0;
        for (Index i = 0; i < s; ++i) {
            acc += std::log(static_cast<double>(n - i));
        }
        return acc;
    }
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(n - s) + 1.0);
}

/// Fraction of [m]^k (partite) or ([m])_k (non-partite) cells that avoid the s
/// selected indices: ((m-s)/m)^k or (m-s)_k/(m)_k.
inline double untouched_fraction(Mode mode, int k, Index m, Index s)
{
    const double rest = static_cast<double>(m - s);
    if (mode == Mode::partite) {
        return std::pow(rest / static_cast<double>(m), k);
    }
    double ratio = 1.0;
    for (int i = 0; i < k; ++i) {
        const auto ii = static_cast<Index>(i);
        if (m - s < ii + 1) {
            return 0.0;
        }
        ratio *= static_cast<double>(m - s - ii) / static_cast<double>(m - ii);
    }
    return ratio;
}

/// Azuma tail bound on P[L_mu(H) - L_x(H) >= eps] for one fixed (sigma, eta),
/// together with the union bound over all (sigma, eta).
inline BoundBreakdown azuma_bound(const GuaranteeInputs& in, Index m)
{
    in.check();
    BoundBreakdown b;
    b.mode = in.mode;
    b.k = in.k;
    b.m = m;
    b.epsilon = in.epsilon;
    const bool degenerate = in.mode == Mode::partite ? m == 0 : m < static_cast<Index>(in.k);
    if (degenerate) {
        b.condition_violated = true;
        b.slack = in.loss_sup;
        return b;
    }
    b.s = in.selection_size(m);
    b.h = in.header_size(m);
    if (b.s > m) {
        throw Error("selection size exceeds m");
    }
    b.slack = (1.0 - untouched_fraction(in.mode, in.k, m, b.s)) * in.loss_sup;
    if (!(b.slack < in.epsilon)) {
        b.condition_violated = true;
        return b;
    }
    b.eps_tilde = in.epsilon - b.slack;
    const double k = in.k;
    const double arity_factor = in.mode == Mode::partite ? k : k * k;
    b.log_single = -b.eps_tilde * b.eps_tilde * static_cast<double>(m - b.s)
                   / (2.0 * arity_factor * in.loss_sup * in.loss_sup);
    b.single_event_bound = std::exp(b.log_single);
    const double sides = in.mode == Mode::partite ? k : 1.0;
    b.log_multiplier = sides * log_falling_factorial(m, b.s) + std::log(static_cast<double>(b.h));
    b.multiplier = std::exp(b.log_multiplier);
    b.log_total = b.log_multiplier + b.log_single;
    b.total_bound = std::clamp(std::exp(b.log_total), 0.0, 1.0);
    return b;
}

struct MpacResult {
    std::optional<Index> m_pac;
    std::optional<Index> slack_threshold; // least m past which the slack condition holds in the window
    Index scan_limit = 0;
    bool tail_certified = false;
    std::string diagnostics;
    std::optional<BoundBreakdown> at_m_pac;
};

/// Least m0 such that every m in [m0, scan_limit] has slack < eps and union
/// bound <= delta, provided the union bound is non-increasing over the top
/// decile of the window.
inline MpacResult m_pac(const GuaranteeInputs& in, Index scan_limit)
{
    in.check();
    if (scan_limit < 1) {
        throw Error("scan limit must be at least 1");
    }
    MpacResult r;
    r.scan_limit = scan_limit;
    const double log_delta = std::log(in.delta);
    const auto both = [&](const BoundBreakdown& b) { return !b.condition_violated && b.log_total <= log_delta; };

    const Index decile = std::max<Index>(1, scan_limit / 10);
    const Index tail_start = scan_limit > decile ? scan_limit - decile : 1;
    r.tail_certified = true;
    double prev = azuma_bound(in, tail_start).log_total;
    for (Index m = tail_start + 1; m <= scan_limit; ++m) {
        const auto b = azuma_bound(in, m);
        if (b.condition_violated || b.log_total > prev) {
            r.tail_certified = false;
            break;
        }
        prev = b.log_total;
    }

    std::optional<Index> lowest_both;
    std::optional<Index> lowest_slack;
    bool both_run = true;
    for (Index m = scan_limit; m >= 1; --m) {
        const auto b = azuma_bound(in, m);
        if (both_run && both(b)) {
            lowest_both = m;
        } else {
            both_run = false;
        }
        if (!b.condition_violated) {
            lowest_slack = m;
        } else {
            break;
        }
    }
    r.slack_threshold = lowest_slack;

    if (!lowest_both) {
        const auto b = azuma_bound(in, scan_limit);
        r.diagnostics = b.condition_violated ? "slack condition fails at the scan limit"
                                             : "union bound " + std::to_string(b.total_bound)
                                                   + " exceeds delta at the scan limit";
        return r;
    }
    if (!r.tail_certified) {
        r.diagnostics = "union bound is not decreasing over the top decile of the scan window";
        return r;
    }
    r.m_pac = lowest_both;
    r.at_m_pac = azuma_bound(in, *lowest_both);
    return r;
}

/// Leading-order guarantee 2 k ||l||^2 / eps^2 * max{1, ln(1/delta)} (partite),
/// with k^2 in place of k for non-partite.
inline double asymptotic_guarantee_reference(const GuaranteeInputs& in)
{
    if (!(in.epsilon > 0.0) || !(in.delta > 0.0 && in.delta < 1.0)) {
        throw Error("epsilon must be positive and delta in (0, 1)");
    }
    const double k = in.k;
    const double arity_factor = in.mode == Mode::partite ? k : k * k;
    return 2.0 * arity_factor * in.loss_sup * in.loss_sup / (in.epsilon * in.epsilon)
           * std::max(1.0, std::log(1.0 / in.delta));
}

} // namespace hasc
