#pragma once

// Tuples, injections, subsampling maps, order choices and orientation
// bundles. All indices are 0-based: [m] is {0, ..., m-1}.

#include "hasc/core.hpp"
#include "hasc/random.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace hasc {

/// (n)_k = n(n-1)...(n-k+1). Zero when k > n, one when k = 0.
/// Throws std::overflow_error if the result does not fit in 64 bits.
inline std::uint64_t falling_factorial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    std::uint64_t result = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        if (__builtin_mul_overflow(result, n - i, &result)) {
            throw std::overflow_error("falling factorial overflows 64 bits");
        }
    }
    return result;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) is divisible by i at every step
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t factor = (n - k + i) / (i / g);
        if (__builtin_mul_overflow(result / g, factor, &result)) {
            throw std::overflow_error("binomial coefficient overflows 64 bits");
        }
    }
    return result;
}

inline bool is_injective(std::span<const Index> tuple)
{
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        for (std::size_t j = i + 1; j < tuple.size(); ++j) {
            if (tuple[i] == tuple[j]) {
                return false;
            }
        }
    }
    return true;
}

/// A k-tuple of indices into [m], optionally required to be injective.
struct KTuple {
    std::vector<Index> entries;
    Index m = 0;
    bool injective = false;

    int arity() const { return static_cast<int>(entries.size()); }

    void check() const
    {
        for (Index e : entries) {
            if (e >= m) {
                throw IndexError("tuple entry " + std::to_string(e) + " outside [" + std::to_string(m) + "]");
            }
        }
        if (injective && !is_injective(entries)) {
            throw IndexError("tuple is not injective");
        }
    }
};

using Permutation = std::vector<int>;

/// All permutations of {0, ..., k-1} in lexicographic order; index 0 is the identity.
inline const std::vector<Permutation>& enumerate_permutations(int k)
{
    if (k < 1 || k > kMaxPermutationArity) {
        throw Error("permutation arity " + std::to_string(k) + " outside [1, "
                    + std::to_string(kMaxPermutationArity) + "]");
    }
    static const auto table = [] {
        std::array<std::vector<Permutation>, kMaxPermutationArity + 1> t;
        for (int n = 1; n <= kMaxPermutationArity; ++n) {
            Permutation p(static_cast<std::size_t>(n));
            std::iota(p.begin(), p.end(), 0);
            do {
                t[static_cast<std::size_t>(n)].push_back(p);
            } while (std::next_permutation(p.begin(), p.end()));
        }
        return t;
    }();
    return table[static_cast<std::size_t>(k)];
}

/// Visits every alpha in [m]^k in row-major order (last coordinate fastest).
template <class Fn>
void for_each_tuple(int k, Index m, Fn&& fn)
{
    if (m == 0) {
        return;
    }
    std::vector<Index> alpha(static_cast<std::size_t>(k), 0);
    for (;;) {
        fn(std::span<const Index>(alpha));
        int i = k - 1;
        while (i >= 0 && ++alpha[static_cast<std::size_t>(i)] == m) {
            alpha[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) {
            return;
        }
    }
}

/// Visits every injective alpha in ([m])_k, in row-major order.
template <class Fn>
void for_each_injective_tuple(int k, Index m, Fn&& fn)
{
    for_each_tuple(k, m, [&](std::span<const Index> alpha) {
        if (is_injective(alpha)) {
            fn(alpha);
        }
    });
}

/// Visits every k-subset of [m] as an increasing tuple, in lexicographic order.
template <class Fn>
void for_each_subset(Index m, int k, Fn&& fn)
{
    const auto kk = static_cast<Index>(k);
    if (kk > m) {
        return;
    }
    std::vector<Index> u(kk);
    std::iota(u.begin(), u.end(), Index{0});
    for (;;) {
        fn(std::span<const Index>(u));
        Index i = kk;
        while (i > 0 && u[i - 1] == m - kk + (i - 1)) {
            --i;
        }
        if (i == 0) {
            return;
        }
        ++u[i - 1];
        for (Index j = i; j < kk; ++j) {
            u[j] = u[j - 1] + 1;
        }
    }
}

/// Lexicographic rank of an increasing k-subset of [m].
inline std::uint64_t subset_rank(std::span<const Index> subset, Index m)
{
    const auto k = subset.size();
    std::uint64_t rank = 0;
    Index next = 0;
    for (std::size_t i = 0; i < k; ++i) {
        for (Index j = next; j < subset[i]; ++j) {
            rank += binomial(m - 1 - j, k - 1 - i);
        }
        next = subset[i] + 1;
    }
    return rank;
}

/// A tuple of injections [s] -> [m]: k of them in partite mode, one in
/// non-partite mode.
struct InjectionVector {
    Mode mode = Mode::partite;
    Index domain = 0;   // s
    Index codomain = 0; // m
    std::vector<std::vector<Index>> maps;

    static InjectionVector identity(Mode mode, int k, Index m)
    {
        InjectionVector iv{mode, m, m, {}};
        std::vector<Index> id(m);
        std::iota(id.begin(), id.end(), Index{0});
        iv.maps.assign(mode == Mode::partite ? static_cast<std::size_t>(k) : 1, id);
        return iv;
    }

    void check(int k) const
    {
        const std::size_t expected = mode == Mode::partite ? static_cast<std::size_t>(k) : 1;
        if (maps.size() != expected) {
            throw IndexError("injection vector has " + std::to_string(maps.size()) + " maps, expected "
                             + std::to_string(expected));
        }
        if (domain > codomain) {
            throw IndexError("subsample size " + std::to_string(domain) + " exceeds sample size "
                             + std::to_string(codomain));
        }
        for (const auto& map : maps) {
            if (map.size() != domain) {
                throw IndexError("injection length does not match subsample size");
            }
            std::vector<bool> seen(codomain, false);
            for (Index v : map) {
                if (v >= codomain) {
                    throw IndexError("injection value " + std::to_string(v) + " outside ["
                                     + std::to_string(codomain) + "]");
                }
                if (seen[v]) {
                    throw IndexError("map is not injective");
                }
                seen[v] = true;
            }
        }
    }

    bool operator==(const InjectionVector&) const = default;
};

/// (outer o inner): first select with `outer` ([n] -> [m]) then with `inner`
/// ([s] -> [n]); contravariance gives inner^# o outer^# = (outer o inner)^#.
inline InjectionVector compose(const InjectionVector& outer, const InjectionVector& inner)
{
    if (outer.maps.size() != inner.maps.size() || inner.codomain != outer.domain) {
        throw IndexError("injection vectors are not composable");
    }
    InjectionVector out{outer.mode, inner.domain, outer.codomain, {}};
    for (std::size_t i = 0; i < outer.maps.size(); ++i) {
        std::vector<Index> map;
        map.reserve(inner.domain);
        for (Index v : inner.maps[i]) {
            map.push_back(outer.maps[i][v]);
        }
        out.maps.push_back(std::move(map));
    }
    return out;
}

/// Order choice for [m]: for every k-subset U an injection alpha_U: [k] -> [m]
/// with image U. Stored as one permutation rank per subset applied to the
/// increasing enumeration of U; an empty rank table is the canonical choice.
class OrderChoice {
public:
    OrderChoice() = default;

    static OrderChoice canonical(Index m, int k)
    {
        if (k < 1) {
            throw Error("order choice arity must be at least 1");
        }
        OrderChoice c;
        c.m_ = m;
        c.k_ = k;
        return c;
    }

    static OrderChoice random(Index m, int k, std::uint64_t seed)
    {
        OrderChoice c = canonical(m, k);
        const auto count = binomial(m, static_cast<std::uint64_t>(k));
        const auto perms = enumerate_permutations(k).size();
        CounterRng rng(seed);
        c.ranks_.resize(count);
        for (auto& r : c.ranks_) {
            r = static_cast<std::uint16_t>(rng.below(perms));
        }
        return c;
    }

    /// Builds a choice from explicit injections listed in lexicographic order of their images.
    static OrderChoice from_injections(Index m, int k, const std::vector<std::vector<Index>>& injections)
    {
        OrderChoice c = canonical(m, k);
        if (injections.size() != binomial(m, static_cast<std::uint64_t>(k))) {
            throw IndexError("order choice must list one injection per k-subset");
        }
        const auto& perms = enumerate_permutations(k);
        std::size_t pos = 0;
        c.ranks_.resize(injections.size());
        for_each_subset(m, k, [&](std::span<const Index> u) {
            const auto& inj = injections[pos];
            std::vector<Index> sorted(inj);
            std::sort(sorted.begin(), sorted.end());
            if (!std::equal(sorted.begin(), sorted.end(), u.begin(), u.end())) {
                throw IndexError("order choice injection image does not match its subset");
            }
            // inj[i] = u[pi[i]]
            Permutation pi(static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < inj.size(); ++i) {
                pi[i] = static_cast<int>(std::find(u.begin(), u.end(), inj[i]) - u.begin());
            }
            c.ranks_[pos] = static_cast<std::uint16_t>(std::find(perms.begin(), perms.end(), pi) - perms.begin());
            ++pos;
        });
        return c;
    }

    Index ground_size() const { return m_; }
    int arity() const { return k_; }
    bool is_canonical() const { return ranks_.empty(); }
    std::uint64_t size() const { return binomial(m_, static_cast<std::uint64_t>(k_)); }

    /// fn(U, alpha_U) for every k-subset U in lexicographic order.
    template <class Fn>
    void for_each(Fn&& fn) const
    {
        std::vector<Index> alpha(static_cast<std::size_t>(k_));
        if (ranks_.empty()) {
            for_each_subset(m_, k_, [&](std::span<const Index> u) { fn(u, u); });
            return;
        }
        const auto& perms = enumerate_permutations(k_);
        std::size_t pos = 0;
        for_each_subset(m_, k_, [&](std::span<const Index> u) {
            const auto& pi = perms[ranks_[pos++]];
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                alpha[i] = u[static_cast<std::size_t>(pi[i])];
            }
            fn(u, std::span<const Index>(alpha));
        });
    }

    /// alpha_U for an increasing subset U.
    std::vector<Index> injection_for(std::span<const Index> subset) const
    {
        std::vector<Index> alpha(subset.begin(), subset.end());
        if (!ranks_.empty()) {
            const auto& pi = enumerate_permutations(k_)[ranks_[subset_rank(subset, m_)]];
            for (std::size_t i = 0; i < alpha.size(); ++i) {
                alpha[i] = subset[static_cast<std::size_t>(pi[i])];
            }
        }
        return alpha;
    }

private:
    Index m_ = 0;
    int k_ = 1;
    std::vector<std::uint16_t> ranks_;
};

inline OrderChoice canonical_order_choice(Index m, int k)
{
    return OrderChoice::canonical(m, k);
}

/// Dense label array over [m]^k in row-major order. In non-partite mode only
/// injective cells carry labels; the diagonal holds kSentinel.
class LabelTensor {
public:
    LabelTensor() = default;

    LabelTensor(Mode mode, int k, Index m, std::vector<Label> alphabet,
                std::size_t cell_budget = kDefaultCellBudget)
        : mode_(mode), k_(k), m_(m), alphabet_(std::move(alphabet))
    {
        if (alphabet_.empty()) {
            throw Error("label alphabet must not be empty");
        }
        for (Label l : alphabet_) {
            if (l == kSentinel) {
                throw Error("label alphabet must not contain the sentinel");
            }
        }
        cells_.assign(checked_cell_count(k, m, cell_budget), alphabet_.front());
        if (mode_ == Mode::nonpartite && k_ > 1) {
            std::size_t off = 0;
            for_each_tuple(k_, m_, [&](std::span<const Index> alpha) {
                if (!is_injective(alpha)) {
                    cells_[off] = kSentinel;
                }
                ++off;
            });
        }
    }

    static LabelTensor from_cells(Mode mode, int k, Index m, std::vector<Label> alphabet,
                                  std::vector<Label> cells, std::size_t cell_budget = kDefaultCellBudget)
    {
        LabelTensor t(mode, k, m, std::move(alphabet), cell_budget);
        if (cells.size() != t.cells_.size()) {
            throw Error("label tensor needs " + std::to_string(t.cells_.size()) + " cells, got "
                        + std::to_string(cells.size()));
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const bool diagonal = t.cells_[i] == kSentinel;
            if (diagonal != (cells[i] == kSentinel) || (!diagonal && !t.in_alphabet(cells[i]))) {
                throw Error("label tensor cell " + std::to_string(i) + " violates the tensor invariants");
            }
        }
        t.cells_ = std::move(cells);
        return t;
    }

    /// m^k, or BudgetError when it exceeds the budget.
    static std::size_t checked_cell_count(int k, Index m, std::size_t budget)
    {
        if (k < 1) {
            throw Error("arity must be at least 1");
        }
        std::size_t count = 1;
        for (int i = 0; i < k; ++i) {
            if (__builtin_mul_overflow(count, m, &count) || count > budget) {
                throw BudgetError("label tensor with m=" + std::to_string(m) + ", k=" + std::to_string(k)
                                  + " exceeds the cell budget of " + std::to_string(budget));
            }
        }
        return count;
    }

    Mode mode() const { return mode_; }
    int arity() const { return k_; }
    Index size() const { return m_; }
    const std::vector<Label>& alphabet() const { return alphabet_; }
    std::span<const Label> cells() const { return cells_; }
    std::size_t cell_count() const { return cells_.size(); }

    bool in_alphabet(Label l) const { return std::find(alphabet_.begin(), alphabet_.end(), l) != alphabet_.end(); }

    std::size_t offset(std::span<const Index> alpha) const
    {
        if (alpha.size() != static_cast<std::size_t>(k_)) {
            throw IndexError("tuple arity does not match tensor arity");
        }
        std::size_t off = 0;
        for (Index a : alpha) {
            if (a >= m_) {
                throw IndexError("tuple entry " + std::to_string(a) + " outside [" + std::to_string(m_) + "]");
            }
            off = off * m_ + a;
        }
        return off;
    }

    bool cell_valid(std::span<const Index> alpha) const { return mode_ == Mode::partite || is_injective(alpha); }

    Label at(std::span<const Index> alpha) const
    {
        if (!cell_valid(alpha)) {
            throw IndexError("non-injective tuple in a non-partite tensor");
        }
        return cells_[offset(alpha)];
    }

    void set(std::span<const Index> alpha, Label value)
    {
        if (!cell_valid(alpha)) {
            throw IndexError("non-injective tuple in a non-partite tensor");
        }
        if (!in_alphabet(value)) {
            throw Error("label " + std::to_string(value) + " is not in the alphabet");
        }
        cells_[offset(alpha)] = value;
    }

    bool operator==(const LabelTensor&) const = default;

private:
    Mode mode_ = Mode::partite;
    int k_ = 1;
    Index m_ = 0;
    std::vector<Label> alphabet_{0, 1};
    std::vector<Label> cells_;
};

/// alpha^*(x): the k-tuple of points indexed by alpha.
inline std::vector<Point> alpha_star_point(const Sample& x, std::span<const Index> alpha)
{
    if (alpha.size() != static_cast<std::size_t>(x.k)) {
        throw IndexError("tuple arity does not match sample arity");
    }
    if (x.mode == Mode::nonpartite && !is_injective(alpha)) {
        throw IndexError("non-injective tuple in a non-partite sample");
    }
    std::vector<Point> out(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const auto& side = x.side(static_cast<int>(i));
        if (alpha[i] >= side.size()) {
            throw IndexError("tuple entry " + std::to_string(alpha[i]) + " outside [" + std::to_string(side.size())
                             + "]");
        }
        out[i] = side[alpha[i]];
    }
    return out;
}

/// Subsample points: (alpha^#(x)_i)_v = (x_i)_{alpha_i(v)}.
inline Sample alpha_sharp(const Sample& x, const InjectionVector& alpha)
{
    x.check();
    if (alpha.mode != x.mode || alpha.codomain != x.size()) {
        throw IndexError("injection vector does not match the sample");
    }
    alpha.check(x.k);
    Sample out = empty_sample(x.mode, x.k);
    for (std::size_t i = 0; i < x.sides.size(); ++i) {
        out.sides[i].reserve(alpha.domain);
        for (Index v : alpha.maps[i]) {
            out.sides[i].push_back(x.sides[i][v]);
        }
    }
    return out;
}

/// Subsample labels. Partite: y'_beta = y_{alpha_1(beta_1), ..., alpha_k(beta_k)};
/// non-partite: y'_beta = y_{alpha o beta}.
inline LabelTensor alpha_sharp(const LabelTensor& y, const InjectionVector& alpha)
{
    if (alpha.mode != y.mode() || alpha.codomain != y.size()) {
        throw IndexError("injection vector does not match the tensor");
    }
    alpha.check(y.arity());
    LabelTensor out(y.mode(), y.arity(), alpha.domain, y.alphabet());
    std::vector<Index> image(static_cast<std::size_t>(y.arity()));
    for_each_tuple(y.arity(), alpha.domain, [&](std::span<const Index> beta) {
        if (!out.cell_valid(beta)) {
            return;
        }
        for (std::size_t i = 0; i < image.size(); ++i) {
            image[i] = alpha.maps[y.mode() == Mode::partite ? i : 0][beta[i]];
        }
        out.set(beta, y.at(image));
    });
    return out;
}

struct OrientationBundle {
    std::vector<Index> subset;  // U, increasing
    std::vector<Label> labels;  // indexed by enumerate_permutations(k)
};

/// (b_alpha(y)_U)_pi = y_{alpha_U o pi} for every k-subset U and pi in S_k.
inline std::vector<OrientationBundle> bundle_orientations(const LabelTensor& y, const OrderChoice& alpha)
{
    if (y.mode() != Mode::nonpartite) {
        throw ModeError("orientation bundles need a non-partite tensor");
    }
    if (alpha.ground_size() != y.size() || alpha.arity() != y.arity()) {
        throw IndexError("order choice does not match the tensor");
    }
    const auto& perms = enumerate_permutations(y.arity());
    std::vector<OrientationBundle> out;
    std::vector<Index> oriented(static_cast<std::size_t>(y.arity()));
    alpha.for_each([&](std::span<const Index> u, std::span<const Index> alpha_u) {
        OrientationBundle b{{u.begin(), u.end()}, {}};
        b.labels.reserve(perms.size());
        for (const auto& pi : perms) {
            for (std::size_t i = 0; i < oriented.size(); ++i) {
                oriented[i] = alpha_u[static_cast<std::size_t>(pi[i])];
            }
            b.labels.push_back(y.at(oriented));
        }
        out.push_back(std::move(b));
    });
    return out;
}

} // namespace hasc
