#pragma once

#include "hasc/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace hasc {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    bool contains(double v) const { return lo <= v && v <= hi; }
    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool operator==(const Interval&) const = default;
};

/// Closed axis-aligned box; labels 1 inside, 0 outside. An empty box labels
/// everything 0.
struct RectangleHypothesis {
    std::vector<Interval> sides;
    bool empty = false;

    bool contains(std::span<const Point> x) const
    {
        if (empty || x.size() != sides.size()) {
            return false;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!sides[i].contains(x[i])) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const RectangleHypothesis&) const = default;
};

/// Labels 1 iff the coordinate sum reaches the threshold.
struct SumThresholdHypothesis {
    double threshold = 0.0;
    bool operator==(const SumThresholdHypothesis&) const = default;
};

/// Explicit lookup table over point tuples; unlisted tuples get `fallback`.
struct TableHypothesis {
    std::map<std::vector<Point>, Label> table;
    Label fallback = 0;
    bool operator==(const TableHypothesis&) const = default;
};

struct ConstantHypothesis {
    Label value = 0;
    bool operator==(const ConstantHypothesis&) const = default;
};

enum class HypothesisKind { rectangle, sum_threshold, table, constant };

inline std::string to_string(HypothesisKind kind)
{
    switch (kind) {
    case HypothesisKind::rectangle: return "rectangle";
    case HypothesisKind::sum_threshold: return "sum-threshold";
    case HypothesisKind::table: return "table";
    case HypothesisKind::constant: return "constant";
    }
    return "?";
}

/// Sum of a point tuple, accumulated in ascending order so the result does
/// not depend on the orientation of the tuple.
inline double point_sum(std::span<const Point> x)
{
    if (x.size() == 2) {
        return x[0] + x[1];
    }
    std::array<Point, kMaxPermutationArity> buf{};
    if (x.size() > buf.size()) {
        std::vector<Point> v(x.begin(), x.end());
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double p : v) {
            s += p;
        }
        return s;
    }
    std::copy(x.begin(), x.end(), buf.begin());
    std::sort(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(x.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += buf[i];
    }
    return s;
}

class Hypothesis {
public:
    using Rep = std::variant<RectangleHypothesis, SumThresholdHypothesis, TableHypothesis, ConstantHypothesis>;

    Hypothesis() : rep_(ConstantHypothesis{0}) {}
    Hypothesis(RectangleHypothesis h) : rep_(std::move(h)) {}
    Hypothesis(SumThresholdHypothesis h) : rep_(h) {}
    Hypothesis(TableHypothesis h) : rep_(std::move(h)) {}
    Hypothesis(ConstantHypothesis h) : rep_(h) {}

    static Hypothesis constant(Label value) { return ConstantHypothesis{value}; }
    static Hypothesis empty_box(int k) { return RectangleHypothesis{std::vector<Interval>(static_cast<std::size_t>(k)), true}; }

    Label operator()(std::span<const Point> x) const
    {
        return std::visit(
            [&](const auto& h) -> Label {
                using T = std::decay_t<decltype(h)>;
                if constexpr (std::is_same_v<T, RectangleHypothesis>) {
                    return h.contains(x) ? 1 : 0;
                } else if constexpr (std::is_same_v<T, SumThresholdHypothesis>) {
                    return point_sum(x) >= h.threshold ? 1 : 0;
                } else if constexpr (std::is_same_v<T, TableHypothesis>) {
                    auto it = h.table.find(std::vector<Point>(x.begin(), x.end()));
                    return it == h.table.end() ? h.fallback : it->second;
                } else {
                    return h.value;
                }
            },
            rep_);
    }

    HypothesisKind kind() const { return static_cast<HypothesisKind>(rep_.index()); }

    template <class T>
    const T* get_if() const
    {
        return std::get_if<T>(&rep_);
    }

    const Rep& rep() const { return rep_; }

    std::string summary() const
    {
        std::ostringstream os;
        os.precision(17);
        std::visit(
            [&](const auto& h) {
                using T = std::decay_t<decltype(h)>;
                if constexpr (std::is_same_v<T, RectangleHypothesis>) {
                    if (h.empty) {
                        os << "box(empty)";
                        return;
                    }
                    os << "box";
                    for (const auto& s : h.sides) {
                        os << "[" << s.lo << "," << s.hi << "]";
                    }
                } else if constexpr (std::is_same_v<T, SumThresholdHypothesis>) {
                    os << "sum>=" << h.threshold;
                } else if constexpr (std::is_same_v<T, TableHypothesis>) {
                    os << "table(" << h.table.size() << " entries, fallback " << h.fallback << ")";
                } else {
                    os << "const(" << h.value << ")";
                }
            },
            rep_);
        return os.str();
    }

    bool operator==(const Hypothesis&) const = default;

private:
    Rep rep_;
};

} // namespace hasc
