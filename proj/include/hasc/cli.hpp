#pragma once

// Command-line front door. Exit codes: 0 success, 1 assertion failure or
// scheme violation, 2 configuration or usage error.

#include "hasc/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace hasc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 1;
inline constexpr int kExitConfig = 2;

namespace detail {

struct CliOptions {
    std::string config;
    std::string sample;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::string out;
    bool fail_fast = false;
    std::string format = "csv";
};

inline ExperimentConfig load_with_overrides(const CliOptions& o)
{
    std::map<std::string, std::string> overrides;
    if (o.seed) {
        overrides["seed"] = std::to_string(*o.seed);
    }
    if (o.trials) {
        overrides["trials"] = std::to_string(*o.trials);
    }
    if (!o.out.empty()) {
        overrides["output"] = o.out;
    }
    return load_config(o.config, overrides);
}

inline json concentration_rows_json(const ConcentrationSummary& s)
{
    json arr = json::array();
    for (const auto& r : s.rows) {
        arr.push_back({{"m", r.m},
                       {"epsilon", r.epsilon},
                       {"skipped", r.skipped},
                       {"note", r.note},
                       {"trials", r.trials},
                       {"exceedances", r.exceedances},
                       {"p_hat", r.p_hat},
                       {"ci", r.ci},
                       {"bound", r.bound},
                       {"pass", r.pass},
                       {"rerun", r.rerun}});
    }
    return arr;
}

inline json pac_rows_json(const PacSummary& s)
{
    json arr = json::array();
    for (const auto& r : s.rows) {
        arr.push_back({{"epsilon", r.epsilon},
                       {"delta", r.delta},
                       {"m", r.m},
                       {"m_pac", r.m_pac ? json(*r.m_pac) : json(nullptr)},
                       {"trials", r.trials},
                       {"failures", r.failures},
                       {"q_hat", r.q_hat},
                       {"ci", r.ci},
                       {"union_bound", r.union_bound},
                       {"mean_total_loss", r.mean_total_loss},
                       {"asserted", r.asserted},
                       {"pass", r.pass},
                       {"rerun", r.rerun}});
    }
    return arr;
}

inline int run_validate(const CliOptions& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig c = load_with_overrides(o);
    ValidityOptions opt;
    opt.trials = c.trials;
    opt.m_values = resolve_m_values(c, std::nullopt);
    opt.seed = c.seed;
    opt.measure = make_measure(c);
    opt.random_order_choices = c.order_choices;
    opt.fail_fast = o.fail_fast;
    const auto report
        = check_compression_validity(make_scheme(c), make_class(c), make_loss(c), opt);

    std::string jsonl;
    for (const auto& r : report.records) {
        jsonl += report_to_json(r).dump() + "\n";
    }
    const std::string summary = "scheme,trials_run,violations\n" + c.scheme + "," + std::to_string(report.trials_run)
                                + "," + std::to_string(report.violations) + "\n";
    if (!c.output.empty()) {
        write_run_files(c.output, "validate-scheme", c, {{"trials.jsonl", jsonl}, {"summary.csv", summary}});
    }
    if (o.format == "json") {
        out << json{{"scheme", c.scheme}, {"trials_run", report.trials_run}, {"violations", report.violations}}.dump(2)
            << "\n";
    } else {
        out << summary;
    }
    if (!report.ok()) {
        for (const auto& r : report.records) {
            if (r.violation) {
                err << "violation: " << report_to_json(r).dump() << "\n";
                break;
            }
        }
        err << report.violations << " of " << report.trials_run << " trials violate zero empirical loss\n";
        return kExitAssertion;
    }
    return kExitOk;
}

inline int run_concentration(const CliOptions& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig c = load_with_overrides(o);
    const auto s = run_concentration_experiment(c);
    const std::string csv = concentration_csv(c, s);
    if (!c.output.empty()) {
        write_run_files(c.output, "concentration", c, {{"trials.jsonl", records_jsonl(s.records)}, {"summary.csv", csv}});
    }
    if (o.format == "json") {
        out << concentration_rows_json(s).dump(2) << "\n";
    } else {
        out << csv;
    }
    if (!s.ok()) {
        for (const auto& r : s.rows) {
            if (!r.pass) {
                err << "concentration assertion failed at m=" << r.m << " eps=" << format_number(r.epsilon)
                    << ": p_hat - ci = " << format_number(r.p_hat - r.ci) << " > bound " << format_number(r.bound)
                    << "\n";
            }
        }
        return kExitAssertion;
    }
    return kExitOk;
}

inline int run_pac(const CliOptions& o, std::ostream& out, std::ostream& err)
{
    const ExperimentConfig c = load_with_overrides(o);
    const auto s = run_pac_experiment(c);
    const std::string csv = pac_csv(c, s);
    if (!c.output.empty()) {
        write_run_files(c.output, "pac", c, {{"trials.jsonl", records_jsonl(s.records)}, {"summary.csv", csv}});
    }
    if (o.format == "json") {
        out << pac_rows_json(s).dump(2) << "\n";
    } else {
        out << csv;
    }
    if (!s.ok()) {
        for (const auto& r : s.rows) {
            if (!r.pass) {
                err << "PAC assertion failed at m=" << r.m << " eps=" << format_number(r.epsilon)
                    << " delta=" << format_number(r.delta) << ": q_hat - ci = " << format_number(r.q_hat - r.ci)
                    << "\n";
            }
        }
        return kExitAssertion;
    }
    return kExitOk;
}

inline int run_mpac(const CliOptions& o, std::ostream& out, std::ostream&)
{
    const ExperimentConfig c = load_with_overrides(o);
    const SelectionScheme scheme = make_scheme(c);
    const LossSpec loss = make_loss(c);
    json arr = json::array();
    std::string csv = "epsilon,delta,m_pac,scan_limit,tail_certified,slack,eps_tilde,single_event_bound,multiplier,"
                      "total_bound,diagnostics\n";
    for (double eps : c.epsilon) {
        for (double delta : c.delta) {
            const auto r = m_pac(GuaranteeInputs::for_scheme(scheme, loss.sup_norm(), eps, delta), c.scan_limit);
            json j = mpac_to_json(r);
            j["epsilon"] = eps;
            j["delta"] = delta;
            arr.push_back(std::move(j));
            csv += format_number(eps) + "," + format_number(delta) + ","
                   + (r.m_pac ? std::to_string(*r.m_pac) : std::string("none")) + "," + std::to_string(r.scan_limit)
                   + "," + (r.tail_certified ? "true" : "false");
            if (r.at_m_pac) {
                const auto& b = *r.at_m_pac;
                csv += "," + format_number(b.slack) + "," + format_number(b.eps_tilde) + ","
                       + format_number(b.single_event_bound) + "," + format_number(b.multiplier) + ","
                       + format_number(b.total_bound);
            } else {
                csv += ",,,,,";
            }
            csv += "," + r.diagnostics + "\n";
        }
    }
    if (!c.output.empty()) {
        write_run_files(c.output, "mpac", c, {{"mpac.json", arr.dump(2) + "\n"}, {"mpac.csv", csv}});
    }
    out << (o.format == "json" ? arr.dump(2) + "\n" : csv);
    return kExitOk;
}

inline int run_bound_table_command(const CliOptions& o, std::ostream& out, std::ostream&)
{
    const ExperimentConfig c = load_with_overrides(o);
    const auto rows = run_bound_table(c);
    const std::string csv = bound_table_csv(rows);
    const std::string js = bound_table_json(rows).dump(2) + "\n";
    if (!c.output.empty()) {
        write_run_files(c.output, "bound-table", c, {{"bound_table.csv", csv}, {"bound_table.json", js}});
    }
    out << (o.format == "json" ? js : csv);
    return kExitOk;
}

inline int run_inspect(const CliOptions& o, std::ostream& out, std::ostream&)
{
    std::ifstream in(o.sample);
    if (!in) {
        throw ConfigError("cannot open sample file '" + o.sample + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("sample file '" + o.sample + "' is not valid JSON: " + e.what());
    }
    SampleDocument doc;
    try {
        doc = sample_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("sample file '" + o.sample + "': " + e.what());
    }
    const auto& x = doc.points;
    std::map<std::string, std::uint64_t> histogram;
    std::uint64_t cells = 0;
    if (doc.labels) {
        for (Label l : doc.labels->cells()) {
            histogram[l == kSentinel ? std::string(kSentinelText) : std::to_string(l)] += 1;
            ++cells;
        }
    }
    if (o.format == "json") {
        json r{{"mode", to_string(x.mode)},
               {"k", x.k},
               {"m", x.size()},
               {"alphabet", doc.alphabet},
               {"cells", cells},
               {"histogram", histogram}};
        out << r.dump(2) << "\n";
        return kExitOk;
    }
    out << "mode      " << to_string(x.mode) << "\n";
    out << "arity k   " << x.k << "\n";
    out << "size m    " << x.size() << "\n";
    out << "tensor    ";
    if (x.mode == Mode::partite) {
        for (int i = 0; i < x.k; ++i) {
            out << (i ? " x " : "") << x.size();
        }
    } else {
        out << "([" << x.size() << "])_" << x.k;
    }
    out << "\n";
    out << "alphabet ";
    for (Label l : doc.alphabet) {
        out << " " << l;
    }
    out << "\n";
    if (!doc.labels) {
        out << "labels    none\n";
        return kExitOk;
    }
    out << "cells     " << cells << "\n";
    for (const auto& [label, count] : histogram) {
        out << "  " << label << "  " << count << "\n";
    }
    return kExitOk;
}

} // namespace detail

/// Parses argv and runs one command; never throws.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"High-arity sample compression simulator", "hasc"};
    app.require_subcommand(1);
    detail::CliOptions o;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "config file (key = value lines)")->required();
        sub->add_option("--seed", o.seed, "override the master seed");
        sub->add_option("--trials", o.trials, "override the number of trials");
        sub->add_option("--out", o.out, "output directory for trial records, summary and manifest");
        sub->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
    };
    auto* validate = app.add_subcommand("validate-scheme", "check zero empirical loss on realizable samples");
    add_common(validate);
    validate->add_flag("--fail-fast", o.fail_fast, "stop at the first violating trial");
    auto* concentration = app.add_subcommand("concentration", "fixed (sigma, eta) concentration trials");
    add_common(concentration);
    auto* pac = app.add_subcommand("pac", "learner failure-rate trials");
    add_common(pac);
    auto* mpac = app.add_subcommand("mpac", "sample-size guarantee and the bound at that size");
    add_common(mpac);
    auto* table = app.add_subcommand("bound-table", "bound breakdown over the epsilon, delta and m grid");
    add_common(table);
    auto* inspect = app.add_subcommand("inspect", "summarize a sample document");
    inspect->add_option("--sample", o.sample, "sample JSON file")->required();
    inspect->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (validate->parsed()) {
            return detail::run_validate(o, out, err);
        }
        if (concentration->parsed()) {
            return detail::run_concentration(o, out, err);
        }
        if (pac->parsed()) {
            return detail::run_pac(o, out, err);
        }
        if (mpac->parsed()) {
            return detail::run_mpac(o, out, err);
        }
        if (table->parsed()) {
            return detail::run_bound_table_command(o, out, err);
        }
        return detail::run_inspect(o, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ModeError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const HarnessError& e) {
        err << "harness error: " << e.what() << "\n";
        return kExitAssertion;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

} // namespace hasc
