#pragma once

// Experiment configuration: flat `key = value` lines, `#` comments,
// comma-separated lists. Keys mirror the ExperimentConfig field names.

#include "hasc/core.hpp"
#include "hasc/losses.hpp"
#include "hasc/samples.hpp"
#include "hasc/schemes.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace hasc {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// An entry of `m_values`: a literal size, or a multiple of m_pac(eps, delta).
struct MValue {
    Index literal = 0;
    double mpac_factor = 0.0; // > 0 means factor * m_pac

    bool relative() const { return mpac_factor > 0.0; }
};

struct TotalLossSpec {
    bool exact = true;
    std::uint64_t n_draws = 10'000;
};

struct ExperimentConfig {
    Mode mode = Mode::partite;
    int k = 2;
    std::string scheme = "rectangle";
    std::string class_id = "rectangles";
    std::string measure = "uniform";
    std::string loss = "zero-one";
    std::vector<double> epsilon{0.1};
    std::vector<double> delta{0.1};
    std::vector<MValue> m_values{{50, 0.0}};
    std::uint64_t trials = 100;
    TotalLossSpec total_loss;
    std::uint64_t seed = 1;
    std::string output;
    std::string sigma = "canonical";   // canonical | random
    std::string eta = "1";             // header value or "random"
    std::string order_choice = "canonical"; // canonical | random
    Index scan_limit = 10'000'000;
    int order_choices = 5;

    /// Effective key/value pairs after defaults and overrides, in key order.
    std::map<std::string, std::string> entries;

    /// Canonical `key = value` text of the effective configuration. The output
    /// location is left out so that a run's files do not depend on where they go.
    std::string canonical_text() const
    {
        std::string out;
        for (const auto& [key, value] : entries) {
            if (key != "output") {
                out += key + " = " + value + "\n";
            }
        }
        return out;
    }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            return parts;
        }
        start = pos + 1;
    }
}

inline double parse_double(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + text + "' is not a number");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text)
{
    try {
        std::size_t used = 0;
        if (!text.empty() && text.front() == '-') {
            throw std::invalid_argument(text);
        }
        const auto v = std::stoull(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + text + "' is not a nonnegative integer");
    }
}

inline const std::map<std::string, std::string>& config_defaults()
{
    static const std::map<std::string, std::string> defaults{
        {"mode", "partite"},        {"k", "2"},
        {"scheme", "rectangle"},    {"class", "rectangles"},
        {"measure", "uniform"},     {"loss", "zero-one"},
        {"epsilon", "0.1"},         {"delta", "0.1"},
        {"m_values", "50"},         {"trials", "100"},
        {"total_loss", "exact"},    {"seed", "1"},
        {"output", ""},             {"sigma", "canonical"},
        {"eta", "1"},               {"order_choice", "canonical"},
        {"scan_limit", "10000000"}, {"order_choices", "5"},
    };
    return defaults;
}

} // namespace detail

/// Parses `key = value` text. Unknown keys, repeated keys and malformed lines
/// are errors naming the offending key or line. `overrides` win over the text.
inline ExperimentConfig parse_config(std::string_view text, const std::map<std::string, std::string>& overrides = {})
{
    using namespace detail;
    std::map<std::string, std::string> given;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string body = trim(line);
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!config_defaults().count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        if (!given.emplace(key, value).second) {
            throw ConfigError("config key '" + key + "' given twice");
        }
    }
    for (const auto& [key, value] : overrides) {
        if (!config_defaults().count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        given[key] = value;
    }

    ExperimentConfig c;
    c.entries = config_defaults();
    for (const auto& [key, value] : given) {
        c.entries[key] = value;
    }
    const auto& e = c.entries;
    try {
        c.mode = parse_mode(e.at("mode"));
    } catch (const Error&) {
        throw ConfigError("key 'mode': expected partite or nonpartite");
    }
    c.k = static_cast<int>(parse_uint("k", e.at("k")));
    if (c.k < 1 || c.k > kMaxPermutationArity) {
        throw ConfigError("key 'k': arity must lie in [1, " + std::to_string(kMaxPermutationArity) + "]");
    }
    c.scheme = e.at("scheme");
    c.class_id = e.at("class");
    c.measure = e.at("measure");
    c.loss = e.at("loss");
    c.epsilon.clear();
    for (const auto& v : split(e.at("epsilon"), ',')) {
        c.epsilon.push_back(parse_double("epsilon", v));
    }
    c.delta.clear();
    for (const auto& v : split(e.at("delta"), ',')) {
        c.delta.push_back(parse_double("delta", v));
    }
    for (double v : c.epsilon) {
        if (!(v > 0.0 && v < 1.0)) {
            throw ConfigError("key 'epsilon': values must lie in (0, 1)");
        }
    }
    for (double v : c.delta) {
        if (!(v > 0.0 && v < 1.0)) {
            throw ConfigError("key 'delta': values must lie in (0, 1)");
        }
    }
    c.m_values.clear();
    for (const auto& v : split(e.at("m_values"), ',')) {
        if (v.size() >= 4 && v.compare(v.size() - 4, 4, "mpac") == 0) {
            std::string factor = trim(std::string_view(v).substr(0, v.size() - 4));
            if (!factor.empty() && factor.back() == '*') {
                factor.pop_back();
            }
            c.m_values.push_back({0, factor.empty() ? 1.0 : parse_double("m_values", trim(factor))});
        } else {
            const Index m = parse_uint("m_values", v);
            if (c.mode == Mode::nonpartite && m < static_cast<Index>(c.k)) {
                throw ConfigError("key 'm_values': non-partite sizes must be at least k");
            }
            c.m_values.push_back({m, 0.0});
        }
    }
    c.trials = parse_uint("trials", e.at("trials"));
    if (c.trials < 1) {
        throw ConfigError("key 'trials': at least one trial is required");
    }
    const std::string tl = e.at("total_loss");
    if (tl == "exact") {
        c.total_loss = {true, 0};
    } else if (tl.rfind("monte-carlo", 0) == 0) {
        const auto colon = tl.find(':');
        c.total_loss = {false, colon == std::string::npos ? 10'000 : parse_uint("total_loss", tl.substr(colon + 1))};
        if (c.total_loss.n_draws < 1) {
            throw ConfigError("key 'total_loss': at least one draw is required");
        }
    } else {
        throw ConfigError("key 'total_loss': expected exact or monte-carlo:N");
    }
    c.seed = parse_uint("seed", e.at("seed"));
    c.output = e.at("output");
    c.sigma = e.at("sigma");
    if (c.sigma != "canonical" && c.sigma != "random") {
        throw ConfigError("key 'sigma': expected canonical or random");
    }
    c.eta = e.at("eta");
    if (c.eta != "random") {
        if (parse_uint("eta", c.eta) < 1) {
            throw ConfigError("key 'eta': headers start at 1");
        }
    }
    c.order_choice = e.at("order_choice");
    if (c.order_choice != "canonical" && c.order_choice != "random") {
        throw ConfigError("key 'order_choice': expected canonical or random");
    }
    c.scan_limit = parse_uint("scan_limit", e.at("scan_limit"));
    if (c.scan_limit < 1) {
        throw ConfigError("key 'scan_limit': must be at least 1");
    }
    c.order_choices = static_cast<int>(parse_uint("order_choices", e.at("order_choices")));
    return c;
}

inline ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {})
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

// ---------------------------------------------------------------------------
// Builders from config ids

inline Distribution parse_distribution(const std::string& text)
{
    const std::string t = detail::trim(text);
    if (t == "uniform") {
        return Distribution::uniform();
    }
    if (t.rfind("discrete(", 0) == 0 && t.back() == ')') {
        std::vector<double> support;
        std::vector<double> weights;
        for (const auto& atom : detail::split(t.substr(9, t.size() - 10), ';')) {
            const auto colon = atom.find(':');
            if (colon == std::string::npos) {
                throw ConfigError("key 'measure': discrete atoms are written value:weight");
            }
            support.push_back(detail::parse_double("measure", detail::trim(atom.substr(0, colon))));
            weights.push_back(detail::parse_double("measure", detail::trim(atom.substr(colon + 1))));
        }
        try {
            return Distribution::discrete(std::move(support), std::move(weights));
        } catch (const Error& err) {
            throw ConfigError(std::string("key 'measure': ") + err.what());
        }
    }
    throw ConfigError("key 'measure': expected uniform or discrete(v:p;...)");
}

/// "uniform", "discrete(v:p;...)", or per-side specs separated by '|' (partite).
inline ProductMeasure make_measure(const ExperimentConfig& c)
{
    ProductMeasure mu{c.mode, c.k, {}};
    const auto parts = detail::split(c.measure, '|');
    const std::size_t sides = c.mode == Mode::partite ? static_cast<std::size_t>(c.k) : 1;
    if (parts.size() == 1) {
        mu.sides.assign(sides, parse_distribution(parts.front()));
    } else if (parts.size() == sides) {
        for (const auto& p : parts) {
            mu.sides.push_back(parse_distribution(p));
        }
    } else {
        throw ConfigError("key 'measure': expected one spec or one per side");
    }
    return mu;
}

inline LossSpec make_loss(const ExperimentConfig& c)
{
    if (c.loss == "zero-one" || c.loss == "0-1") {
        return LossSpec::zero_one(c.mode);
    }
    throw ConfigError("key 'loss': only zero-one is built in");
}

inline HypothesisClass make_class(const ExperimentConfig& c)
{
    if (c.class_id == "rectangles") {
        if (c.mode != Mode::partite) {
            throw ConfigError("key 'class': rectangles are a partite class");
        }
        return HypothesisClass::rectangles(c.k);
    }
    if (c.class_id == "sum-threshold") {
        if (c.mode != Mode::nonpartite) {
            throw ConfigError("key 'class': sum-threshold is a non-partite class");
        }
        return HypothesisClass::sum_thresholds(c.k);
    }
    throw ConfigError("key 'class': unknown class '" + c.class_id + "'");
}

inline SelectionScheme make_scheme(const ExperimentConfig& c)
{
    if (c.scheme == "rectangle") {
        if (c.mode != Mode::partite) {
            throw ConfigError("key 'scheme': rectangle is a partite scheme");
        }
        return rectangle_scheme(c.k);
    }
    if (c.scheme == "sum-threshold") {
        if (c.mode != Mode::nonpartite) {
            throw ConfigError("key 'scheme': sum-threshold is a non-partite scheme");
        }
        return sum_threshold_scheme(c.k);
    }
    if (c.scheme == "trivial") {
        return trivial_scheme(make_class(c), make_loss(c));
    }
    if (c.scheme == "constant-0" || c.scheme == "constant-1") {
        return constant_scheme(c.mode, c.k, c.scheme.back() == '1' ? 1 : 0);
    }
    throw ConfigError("key 'scheme': unknown scheme '" + c.scheme + "'");
}

/// Git blob hash (SHA-1 over "blob <size>\0<content>") as lowercase hex.
inline std::string git_blob_hash(std::string_view content)
{
    const std::string header = "blob " + std::to_string(content.size()) + '\0';
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
    EVP_DigestUpdate(ctx, header.data(), header.size());
    EVP_DigestUpdate(ctx, content.data(), content.size());
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

} // namespace hasc
