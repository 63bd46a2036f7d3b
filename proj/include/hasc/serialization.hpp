#pragma once

// JSON documents for samples, hypotheses, compressions, reports and bounds.
// Sample document: {mode, k, m, Y, points, labels}; labels are row-major over
// [m]^k with "·" in the non-injective cells of non-partite tensors.

#include "hasc/learner.hpp"
#include "hasc/losses.hpp"
#include "hasc/samples.hpp"
#include "hasc/schemes.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace hasc {

using json = nlohmann::json;

inline constexpr const char* kSentinelText = "·";

struct SampleDocument {
    Sample points;
    std::vector<Label> alphabet{0, 1};
    std::optional<LabelTensor> labels;
};

inline json sample_to_json(const Sample& x, const std::vector<Label>& alphabet, const LabelTensor* y)
{
    json j;
    j["mode"] = to_string(x.mode);
    j["k"] = x.k;
    j["m"] = x.size();
    j["Y"] = alphabet;
    if (x.mode == Mode::partite) {
        j["points"] = x.sides;
    } else {
        j["points"] = x.sides.front();
    }
    if (y) {
        json cells = json::array();
        for (Label l : y->cells()) {
            if (l == kSentinel) {
                cells.push_back(kSentinelText);
            } else {
                cells.push_back(l);
            }
        }
        j["labels"] = std::move(cells);
    }
    return j;
}

inline json sample_to_json(const LabeledSample& xy)
{
    const LabelTensor y = xy.materialize();
    return sample_to_json(xy.points(), xy.alphabet(), &y);
}

inline SampleDocument sample_from_json(const json& j)
{
    SampleDocument doc;
    const Mode mode = parse_mode(j.at("mode").get<std::string>());
    const int k = j.at("k").get<int>();
    const Index m = j.at("m").get<Index>();
    doc.points = empty_sample(mode, k);
    if (mode == Mode::partite) {
        doc.points.sides = j.at("points").get<std::vector<std::vector<Point>>>();
    } else {
        doc.points.sides.front() = j.at("points").get<std::vector<Point>>();
    }
    doc.points.check();
    if (doc.points.size() != m) {
        throw Error("sample document declares m=" + std::to_string(m) + " but lists "
                    + std::to_string(doc.points.size()) + " points per side");
    }
    if (j.contains("Y")) {
        doc.alphabet = j.at("Y").get<std::vector<Label>>();
    }
    if (j.contains("labels")) {
        std::vector<Label> cells;
        for (const auto& c : j.at("labels")) {
            cells.push_back(c.is_string() ? kSentinel : c.get<Label>());
        }
        doc.labels = LabelTensor::from_cells(mode, k, m, doc.alphabet, std::move(cells));
    }
    return doc;
}

inline LabeledSample labeled_sample_from_json(const json& j)
{
    SampleDocument doc = sample_from_json(j);
    if (!doc.labels) {
        throw Error("sample document has no labels");
    }
    return LabeledSample(std::move(doc.points), std::move(*doc.labels));
}

inline json hypothesis_to_json(const Hypothesis& h)
{
    json j;
    j["kind"] = to_string(h.kind());
    if (const auto* r = h.get_if<RectangleHypothesis>()) {
        j["empty"] = r->empty;
        json sides = json::array();
        for (const auto& s : r->sides) {
            sides.push_back({s.lo, s.hi});
        }
        j["sides"] = std::move(sides);
    } else if (const auto* t = h.get_if<SumThresholdHypothesis>()) {
        j["threshold"] = t->threshold;
    } else if (const auto* tab = h.get_if<TableHypothesis>()) {
        j["fallback"] = tab->fallback;
        json entries = json::array();
        for (const auto& [key, value] : tab->table) {
            entries.push_back({{"points", key}, {"label", value}});
        }
        j["table"] = std::move(entries);
    } else if (const auto* c = h.get_if<ConstantHypothesis>()) {
        j["value"] = c->value;
    }
    return j;
}

inline Hypothesis hypothesis_from_json(const json& j)
{
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "rectangle") {
        RectangleHypothesis r;
        r.empty = j.value("empty", false);
        for (const auto& s : j.at("sides")) {
            r.sides.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
        }
        return r;
    }
    if (kind == "sum-threshold") {
        return SumThresholdHypothesis{j.at("threshold").get<double>()};
    }
    if (kind == "table") {
        TableHypothesis t;
        t.fallback = j.at("fallback").get<Label>();
        for (const auto& e : j.at("table")) {
            t.table[e.at("points").get<std::vector<Point>>()] = e.at("label").get<Label>();
        }
        return t;
    }
    if (kind == "constant") {
        return Hypothesis::constant(j.at("value").get<Label>());
    }
    throw Error("unknown hypothesis kind '" + kind + "'");
}

inline json injection_to_json(const InjectionVector& iv)
{
    return {{"mode", to_string(iv.mode)}, {"s", iv.domain}, {"m", iv.codomain}, {"maps", iv.maps}};
}

inline InjectionVector injection_from_json(const json& j)
{
    return {parse_mode(j.at("mode").get<std::string>()), j.at("s").get<Index>(), j.at("m").get<Index>(),
            j.at("maps").get<std::vector<std::vector<Index>>>()};
}

/// kappa's output alone: enough to run rho.
inline json compressed_to_json(const Compressed& c)
{
    return {{"m", c.m}, {"header", c.header}, {"subsample", sample_to_json(c.subsample)}};
}

inline Compressed compressed_from_json(const json& j)
{
    Compressed c;
    c.m = j.at("m").get<Index>();
    c.header = j.at("header").get<std::size_t>();
    c.subsample = labeled_sample_from_json(j.at("subsample"));
    return c;
}

inline json report_to_json(const CompressionReport& r)
{
    json j{{"trial", r.trial},
           {"m", r.m},
           {"s_m", r.s_m},
           {"h_m", r.h_m},
           {"selected", r.selection.maps},
           {"header", r.header},
           {"hypothesis", r.hypothesis},
           {"empirical_loss", r.empirical_loss},
           {"threshold", r.threshold},
           {"violation", r.violation}};
    if (!r.order_choice.empty()) {
        j["order_choice"] = r.order_choice;
    }
    if (r.violation) {
        j["offending_cell"] = r.offending_cell;
    }
    return j;
}

inline json estimate_to_json(const MonteCarloEstimate& e)
{
    return {{"estimate", e.estimate}, {"ci", e.ci}, {"n_draws", e.n_draws}, {"seed", e.seed}};
}

inline json bound_to_json(const BoundBreakdown& b)
{
    return {{"mode", to_string(b.mode)},
            {"k", b.k},
            {"m", b.m},
            {"s", b.s},
            {"h", b.h},
            {"epsilon", b.epsilon},
            {"slack", b.slack},
            {"eps_tilde", b.eps_tilde},
            {"log_single", b.log_single},
            {"single_event_bound", b.single_event_bound},
            {"log_multiplier", b.log_multiplier},
            {"multiplier", std::isfinite(b.multiplier) ? json(b.multiplier) : json("inf")},
            {"log_total", b.log_total},
            {"total_bound", b.total_bound},
            {"condition_violated", b.condition_violated}};
}

inline json mpac_to_json(const MpacResult& r)
{
    json j{{"m_pac", r.m_pac ? json(*r.m_pac) : json("not found")},
           {"scan_limit", r.scan_limit},
           {"tail_certified", r.tail_certified}};
    j["slack_threshold"] = r.slack_threshold ? json(*r.slack_threshold) : json(nullptr);
    if (!r.diagnostics.empty()) {
        j["diagnostics"] = r.diagnostics;
    }
    if (r.at_m_pac) {
        j["bound"] = bound_to_json(*r.at_m_pac);
    }
    return j;
}

} // namespace hasc
