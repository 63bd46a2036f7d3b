#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hasc {

using Index = std::size_t;
using Label = std::int32_t;
using Point = double;

/// Partite samples have k sides of m points each; non-partite samples have a
/// single ground set of m points.
enum class Mode { partite, nonpartite };

/// Marks the non-injective cells of a non-partite label tensor.
inline constexpr Label kSentinel = -1;
inline constexpr std::size_t kDefaultCellBudget = 100'000'000;
inline constexpr int kMaxPermutationArity = 8;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class BudgetError : public Error {
public:
    using Error::Error;
};

class ModeError : public Error {
public:
    using Error::Error;
};

inline std::string to_string(Mode mode)
{
    return mode == Mode::partite ? "partite" : "nonpartite";
}

inline Mode parse_mode(std::string_view text)
{
    if (text == "partite") {
        return Mode::partite;
    }
    if (text == "nonpartite" || text == "non-partite") {
        return Mode::nonpartite;
    }
    throw Error("unknown mode '" + std::string(text) + "'");
}

/// Unlabeled sample. Partite: `sides` holds k lists of m points. Non-partite:
/// `sides` holds a single list of m points and `k` is the label arity.
struct Sample {
    Mode mode = Mode::partite;
    int k = 1;
    std::vector<std::vector<Point>> sides;

    Index size() const { return sides.empty() ? 0 : sides.front().size(); }

    const std::vector<Point>& side(int i) const
    {
        return mode == Mode::partite ? sides[static_cast<std::size_t>(i)] : sides.front();
    }

    void check() const
    {
        if (k < 1) {
            throw Error("arity must be at least 1");
        }
        const std::size_t expected = mode == Mode::partite ? static_cast<std::size_t>(k) : 1;
        if (sides.size() != expected) {
            throw Error("sample has " + std::to_string(sides.size()) + " point lists, expected "
                        + std::to_string(expected));
        }
        for (const auto& s : sides) {
            if (s.size() != sides.front().size()) {
                throw Error("partite sides must all have the same size");
            }
        }
    }

    bool operator==(const Sample&) const = default;
};

inline Sample empty_sample(Mode mode, int k)
{
    Sample x;
    x.mode = mode;
    x.k = k;
    x.sides.resize(mode == Mode::partite ? static_cast<std::size_t>(k) : 1);
    return x;
}

} // namespace hasc
