#pragma once

// Monte Carlo harness: fixed-(sigma, eta) concentration trials, full-learner
// failure-rate trials and bound tables. Everything is a pure function of the
// config (including its seed), so reruns write byte-identical files.

#include "hasc/config.hpp"
#include "hasc/learner.hpp"
#include "hasc/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hasc {

/// One learner or reconstruction run: the event of interest is gap >= epsilon
/// (concentration) or total > epsilon (PAC).
struct TrialRecord {
    std::string experiment;
    std::uint64_t trial = 0;
    Index m = 0;
    double epsilon = 0.0;
    std::optional<double> delta;
    double total_loss = 0.0;
    double empirical_loss = 0.0;
    double gap = 0.0; // total - empirical, may be negative
    bool exceeded = false;
    std::size_t header = 1;
    std::vector<std::vector<Index>> selected;
    bool rerun = false;
};

inline json trial_to_json(const TrialRecord& r)
{
    json j{{"experiment", r.experiment},
           {"trial", r.trial},
           {"m", r.m},
           {"epsilon", r.epsilon},
           {"total_loss", r.total_loss},
           {"empirical_loss", r.empirical_loss},
           {"gap", r.gap},
           {"exceeded", r.exceeded},
           {"header", r.header},
           {"selected", r.selected},
           {"rerun", r.rerun}};
    if (r.delta) {
        j["delta"] = *r.delta;
    }
    return j;
}

/// Fixed number formatting for CSV cells: shortest round-trip text.
inline std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return json(v).dump();
}

/// 99% normal-approximation half-width for a frequency.
inline double frequency_ci(double p, std::uint64_t n)
{
    return kCi99 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

/// Resolves m_values entries, replacing `N*mpac` by ceil(N * m_pac).
inline std::vector<Index> resolve_m_values(const ExperimentConfig& c, const std::optional<Index>& mpac)
{
    std::vector<Index> out;
    for (const auto& v : c.m_values) {
        if (!v.relative()) {
            out.push_back(v.literal);
            continue;
        }
        if (!mpac) {
            throw ConfigError("key 'm_values': m_pac is not available in the scan window");
        }
        out.push_back(static_cast<Index>(std::ceil(v.mpac_factor * static_cast<double>(*mpac) - 1e-9)));
    }
    return out;
}

/// Total loss of h against F: exact closed form or Monte Carlo, per the config.
inline double total_loss_of(const ExperimentConfig& c, const ProductMeasure& mu, const Hypothesis& f,
                            const Hypothesis& h, const LossSpec& loss, std::uint64_t seed)
{
    if (c.total_loss.exact) {
        if (auto v = exact_total_loss(mu, f, h, loss)) {
            return *v;
        }
        throw ConfigError("key 'total_loss': no exact formula for this measure and class; use monte-carlo:N");
    }
    return total_loss_monte_carlo(mu, f, h, loss, c.total_loss.n_draws, seed).estimate;
}

// ---------------------------------------------------------------------------
// Concentration

struct ConcentrationRow {
    Index m = 0;
    double epsilon = 0.0;
    bool skipped = false;
    std::string note;
    std::uint64_t trials = 0;
    std::uint64_t exceedances = 0;
    double p_hat = 0.0;
    double ci = 0.0;
    double bound = 1.0;
    bool pass = true;
    bool rerun = false;
};

struct ConcentrationSummary {
    std::vector<ConcentrationRow> rows;
    std::vector<TrialRecord> records;
    bool ok() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const ConcentrationRow& r) { return r.pass; });
    }
};

/// sigma and eta for each m, and the labeling F; all fixed before any sample is drawn.
struct ConcentrationSetup {
    std::function<InjectionVector(Index)> sigma;
    std::function<std::size_t(Index)> eta;
    Hypothesis target;
    std::function<OrderChoice(Index)> order_choice; // non-partite only
};

/// sigma from the config: images in the top s indices (`canonical`) or a
/// random injection per m; eta a fixed header or uniform per m; F drawn from the class.
inline ConcentrationSetup concentration_setup(const ExperimentConfig& c, const SelectionScheme& scheme)
{
    ConcentrationSetup setup;
    const std::uint64_t seed = c.seed;
    const Mode mode = c.mode;
    const int k = c.k;
    const bool random_sigma = c.sigma == "random";
    const auto selection_size = scheme.selection_size;
    setup.sigma = [=](Index m) {
        const Index s = selection_size(m);
        InjectionVector iv{mode, s, m, {}};
        const int maps = mode == Mode::partite ? k : 1;
        for (int i = 0; i < maps; ++i) {
            std::vector<Index> pool(m);
            std::iota(pool.begin(), pool.end(), Index{0});
            if (random_sigma) {
                CounterRng rng(derive_seed(seed, {m, 3, static_cast<std::uint64_t>(i)}));
                for (Index j = 0; j < s; ++j) {
                    std::swap(pool[j], pool[j + rng.below(m - j)]);
                }
                pool.resize(s);
            } else {
                pool.erase(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m - s));
            }
            iv.maps.push_back(std::move(pool));
        }
        return iv;
    };
    const auto header_size = scheme.header_size;
    const std::string eta = c.eta;
    setup.eta = [=](Index m) -> std::size_t {
        const std::size_t h = header_size(m);
        if (eta == "random") {
            CounterRng rng(derive_seed(seed, {m, 4}));
            return 1 + static_cast<std::size_t>(rng.below(h));
        }
        const auto v = static_cast<std::size_t>(std::stoull(eta));
        if (v > h) {
            throw ConfigError("key 'eta': header " + eta + " exceeds h_m = " + std::to_string(h));
        }
        return v;
    };
    setup.target = draw_hypothesis(make_class(c), derive_seed(seed, {5}));
    const bool random_order = c.order_choice == "random";
    setup.order_choice = [=](Index m) {
        return random_order ? OrderChoice::random(m, k, derive_seed(seed, {m, 6})) : OrderChoice::canonical(m, k);
    };
    return setup;
}

namespace detail {

struct GapDraw {
    double total = 0.0;
    double empirical = 0.0;
};

} // namespace detail

/// For each m: T samples x ~ mu^m, H = rho(sigma^#(x, F^*_m(x)), eta), and the
/// frequency of total - empirical >= eps against the single-event bound.
/// An m where the slack condition fails is skipped with a note. A failed
/// assertion reruns once with 4T fresh trials.
inline ConcentrationSummary run_concentration_experiment(const ExperimentConfig& c, const ConcentrationSetup& setup)
{
    const SelectionScheme scheme = make_scheme(c);
    const LossSpec loss = make_loss(c);
    const ProductMeasure mu = make_measure(c);
    ConcentrationSummary out;
    for (Index m : resolve_m_values(c, std::nullopt)) {
        std::vector<double> live;
        std::map<double, BoundBreakdown> bounds;
        for (double eps : c.epsilon) {
            const auto b = azuma_bound(GuaranteeInputs::for_scheme(scheme, loss.sup_norm(), eps, 0.5), m);
            bounds[eps] = b;
            if (b.condition_violated) {
                ConcentrationRow row;
                row.m = m;
                row.epsilon = eps;
                row.skipped = true;
                row.note = "slack " + format_number(b.slack) + " >= epsilon";
                out.rows.push_back(row);
            } else {
                live.push_back(eps);
            }
        }
        if (live.empty()) {
            continue;
        }
        const InjectionVector sigma = setup.sigma(m);
        const std::size_t eta = setup.eta(m);
        std::optional<OrderChoice> alpha;
        if (c.mode == Mode::nonpartite) {
            alpha = setup.order_choice(m);
        }

        const auto draw = [&](std::uint64_t round, std::uint64_t t) {
            const std::uint64_t trial_seed = derive_seed(c.seed, {m, round, t});
            LabeledSample xy = label_lazily(setup.target, draw_sample(mu, m, derive_seed(trial_seed, {1})));
            LabeledSample sub = alpha_sharp(xy, sigma);
            const Hypothesis h = reconstruct(scheme, sub, eta, m);
            detail::GapDraw g;
            g.total = total_loss_of(c, mu, setup.target, h, loss, derive_seed(trial_seed, {2}));
            g.empirical = empirical_loss(xy, h, loss, alpha ? &*alpha : nullptr);
            return g;
        };

        const auto run_round = [&](std::uint64_t round, std::uint64_t trials, bool rerun,
                                   const std::vector<double>& epsilons) {
            std::map<double, std::uint64_t> hits;
            for (std::uint64_t t = 0; t < trials; ++t) {
                const auto g = draw(round, t);
                for (double eps : epsilons) {
                    TrialRecord r;
                    r.experiment = "concentration";
                    r.trial = t;
                    r.m = m;
                    r.epsilon = eps;
                    r.total_loss = g.total;
                    r.empirical_loss = g.empirical;
                    r.gap = g.total - g.empirical;
                    r.exceeded = r.gap >= eps;
                    r.header = eta;
                    r.selected = sigma.maps;
                    r.rerun = rerun;
                    hits[eps] += r.exceeded ? 1 : 0;
                    out.records.push_back(std::move(r));
                }
            }
            return hits;
        };

        const auto hits = run_round(0, c.trials, false, live);
        std::vector<double> failed;
        std::map<double, ConcentrationRow> rows;
        for (double eps : live) {
            ConcentrationRow row;
            row.m = m;
            row.epsilon = eps;
            row.trials = c.trials;
            row.exceedances = hits.at(eps);
            row.p_hat = static_cast<double>(row.exceedances) / static_cast<double>(row.trials);
            row.ci = frequency_ci(row.p_hat, row.trials);
            row.bound = bounds.at(eps).single_event_bound;
            row.pass = row.p_hat - row.ci <= row.bound;
            if (!row.pass) {
                failed.push_back(eps);
            }
            rows[eps] = row;
        }
        if (!failed.empty()) {
            const auto again = run_round(1, 4 * c.trials, true, failed);
            for (double eps : failed) {
                auto& row = rows[eps];
                row.rerun = true;
                row.trials = 4 * c.trials;
                row.exceedances = again.at(eps);
                row.p_hat = static_cast<double>(row.exceedances) / static_cast<double>(row.trials);
                row.ci = frequency_ci(row.p_hat, row.trials);
                row.pass = row.p_hat - row.ci <= row.bound;
            }
        }
        for (double eps : live) {
            out.rows.push_back(rows[eps]);
        }
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const ConcentrationRow& a, const ConcentrationRow& b) {
        return a.m != b.m ? a.m < b.m : a.epsilon < b.epsilon;
    });
    return out;
}

inline ConcentrationSummary run_concentration_experiment(const ExperimentConfig& c)
{
    return run_concentration_experiment(c, concentration_setup(c, make_scheme(c)));
}

inline std::string concentration_csv(const ExperimentConfig& c, const ConcentrationSummary& s)
{
    std::string out = "mode,k,scheme,sigma,eta,m,epsilon,trials,exceedances,p_hat,ci,bound,pass,rerun,note\n";
    for (const auto& r : s.rows) {
        out += to_string(c.mode) + "," + std::to_string(c.k) + "," + c.scheme + "," + c.sigma + "," + c.eta + ","
               + std::to_string(r.m) + "," + format_number(r.epsilon) + "," + std::to_string(r.trials) + ","
               + std::to_string(r.exceedances) + "," + format_number(r.p_hat) + "," + format_number(r.ci) + ","
               + format_number(r.bound) + "," + (r.skipped ? "skipped" : r.pass ? "true" : "false") + ","
               + (r.rerun ? "true" : "false") + "," + r.note + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// PAC

struct PacRow {
    double epsilon = 0.0;
    double delta = 0.0;
    Index m = 0;
    std::optional<Index> m_pac;
    std::uint64_t trials = 0;
    std::uint64_t failures = 0;
    double q_hat = 0.0;
    double ci = 0.0;
    double union_bound = 1.0;
    double mean_total_loss = 0.0;
    bool asserted = false; // m >= m_pac
    bool pass = true;
    bool rerun = false;
};

struct PacSummary {
    std::vector<PacRow> rows;
    std::vector<TrialRecord> records;
    bool ok() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const PacRow& r) { return r.pass; });
    }
};

/// For each (eps, delta) and m: F drawn from the class, x ~ mu^m, y = F^*_m(x)
/// certified realizable, H = learn(scheme, (x, y)); failure means total loss
/// of H exceeds eps. For m >= m_pac the failure frequency must satisfy
/// q - CI <= delta (rerun once with 4T before failing).
inline PacSummary run_pac_experiment(const ExperimentConfig& c, std::size_t dense_cell_limit = 1'000'000)
{
    const SelectionScheme scheme = make_scheme(c);
    const HypothesisClass cls = make_class(c);
    const LossSpec loss = make_loss(c);
    const ProductMeasure mu = make_measure(c);
    PacSummary out;
    for (double eps : c.epsilon) {
        for (double delta : c.delta) {
            const auto in = GuaranteeInputs::for_scheme(scheme, loss.sup_norm(), eps, delta);
            const MpacResult mp = m_pac(in, c.scan_limit);
            for (Index m : resolve_m_values(c, mp.m_pac)) {
                if (c.mode == Mode::nonpartite && m < static_cast<Index>(c.k)) {
                    throw ConfigError("key 'm_values': non-partite sizes must be at least k");
                }
                const auto run_round = [&](std::uint64_t round, std::uint64_t trials, bool rerun) {
                    std::uint64_t failures = 0;
                    double loss_sum = 0.0;
                    for (std::uint64_t t = 0; t < trials; ++t) {
                        const std::uint64_t trial_seed = derive_seed(c.seed, {m, round, t});
                        Hypothesis f;
                        LabeledSample xy = realizable_sample(cls, mu, m, trial_seed, dense_cell_limit, &f);
                        const OrderChoice* alpha = nullptr;
                        std::optional<OrderChoice> canonical;
                        if (c.mode == Mode::nonpartite && !xy.labeler()) {
                            canonical = OrderChoice::canonical(m, c.k);
                            alpha = &*canonical;
                        }
                        if (!erm_realizability_check(cls, xy, loss, alpha).realizable) {
                            throw HarnessError("generated sample is not realizable (m=" + std::to_string(m)
                                               + ", trial " + std::to_string(t) + ")");
                        }
                        const Compressed comp = kappa(scheme, xy);
                        const Hypothesis h = reconstruct(scheme, comp);
                        TrialRecord r;
                        r.experiment = "pac";
                        r.trial = t;
                        r.m = m;
                        r.epsilon = eps;
                        r.delta = delta;
                        r.total_loss = total_loss_of(c, mu, f, h, loss, derive_seed(trial_seed, {2}));
                        r.empirical_loss = empirical_loss(xy, h, loss, alpha);
                        r.gap = r.total_loss - r.empirical_loss;
                        r.exceeded = r.total_loss > eps;
                        r.header = comp.header;
                        r.selected = comp.selection.maps;
                        r.rerun = rerun;
                        failures += r.exceeded ? 1 : 0;
                        loss_sum += r.total_loss;
                        out.records.push_back(std::move(r));
                    }
                    return std::pair{failures, loss_sum / static_cast<double>(trials)};
                };

                PacRow row;
                row.epsilon = eps;
                row.delta = delta;
                row.m = m;
                row.m_pac = mp.m_pac;
                row.trials = c.trials;
                const auto b = azuma_bound(in, m);
                row.union_bound = b.condition_violated ? 1.0 : b.total_bound;
                row.asserted = mp.m_pac && m >= *mp.m_pac;
                auto [failures, mean_loss] = run_round(0, c.trials, false);
                row.failures = failures;
                row.mean_total_loss = mean_loss;
                row.q_hat = static_cast<double>(failures) / static_cast<double>(row.trials);
                row.ci = frequency_ci(row.q_hat, row.trials);
                row.pass = !row.asserted || row.q_hat - row.ci <= delta;
                if (!row.pass) {
                    auto [f2, l2] = run_round(1, 4 * c.trials, true);
                    row.rerun = true;
                    row.trials = 4 * c.trials;
                    row.failures = f2;
                    row.mean_total_loss = l2;
                    row.q_hat = static_cast<double>(f2) / static_cast<double>(row.trials);
                    row.ci = frequency_ci(row.q_hat, row.trials);
                    row.pass = row.q_hat - row.ci <= delta;
                }
                out.rows.push_back(row);
            }
        }
    }
    return out;
}

inline std::string pac_csv(const ExperimentConfig& c, const PacSummary& s)
{
    std::string out
        = "mode,k,scheme,epsilon,delta,m,m_pac,trials,failures,q_hat,ci,union_bound,mean_total_loss,asserted,pass,rerun\n";
    for (const auto& r : s.rows) {
        out += to_string(c.mode) + "," + std::to_string(c.k) + "," + c.scheme + "," + format_number(r.epsilon) + ","
               + format_number(r.delta) + "," + std::to_string(r.m) + ","
               + (r.m_pac ? std::to_string(*r.m_pac) : std::string("none")) + "," + std::to_string(r.trials) + ","
               + std::to_string(r.failures) + "," + format_number(r.q_hat) + "," + format_number(r.ci) + ","
               + format_number(r.union_bound) + "," + format_number(r.mean_total_loss) + ","
               + (r.asserted ? "true" : "false") + "," + (r.pass ? "true" : "false") + ","
               + (r.rerun ? "true" : "false") + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bound table

struct BoundRow {
    BoundBreakdown bound;
    double delta = 0.0;
    std::optional<Index> m_pac;
    double asymptotic = 0.0;
    std::optional<double> ratio; // m_pac / asymptotic
};

/// Rows ordered by epsilon, then delta, then m as listed.
inline std::vector<BoundRow> run_bound_table(const ExperimentConfig& c)
{
    const SelectionScheme scheme = make_scheme(c);
    const LossSpec loss = make_loss(c);
    std::vector<BoundRow> rows;
    for (double eps : c.epsilon) {
        for (double delta : c.delta) {
            const auto in = GuaranteeInputs::for_scheme(scheme, loss.sup_norm(), eps, delta);
            const MpacResult mp = m_pac(in, c.scan_limit);
            const double asym = asymptotic_guarantee_reference(in);
            for (Index m : resolve_m_values(c, mp.m_pac)) {
                BoundRow row;
                row.bound = azuma_bound(in, m);
                row.delta = delta;
                row.m_pac = mp.m_pac;
                row.asymptotic = asym;
                if (mp.m_pac) {
                    row.ratio = static_cast<double>(*mp.m_pac) / asym;
                }
                rows.push_back(row);
            }
        }
    }
    return rows;
}

inline std::string bound_table_csv(const std::vector<BoundRow>& rows)
{
    std::string out = "mode,k,m,epsilon,delta,slack,eps_tilde,single_event_bound,multiplier,total_bound,m_pac,"
                      "asymptotic_reference,ratio\n";
    for (const auto& r : rows) {
        const auto& b = r.bound;
        out += to_string(b.mode) + "," + std::to_string(b.k) + "," + std::to_string(b.m) + ","
               + format_number(b.epsilon) + "," + format_number(r.delta) + "," + format_number(b.slack) + ","
               + format_number(b.eps_tilde) + "," + format_number(b.single_event_bound) + ","
               + format_number(b.multiplier) + "," + format_number(b.total_bound) + ","
               + (r.m_pac ? std::to_string(*r.m_pac) : std::string("none")) + "," + format_number(r.asymptotic)
               + "," + (r.ratio ? format_number(*r.ratio) : std::string("none")) + "\n";
    }
    return out;
}

inline json bound_table_json(const std::vector<BoundRow>& rows)
{
    json arr = json::array();
    for (const auto& r : rows) {
        json j = bound_to_json(r.bound);
        j["delta"] = r.delta;
        j["m_pac"] = r.m_pac ? json(*r.m_pac) : json(nullptr);
        j["asymptotic_reference"] = r.asymptotic;
        j["ratio"] = r.ratio ? json(*r.ratio) : json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

// ---------------------------------------------------------------------------
// Output files

/// Writes name -> content into `dir` plus manifest.json holding the config echo,
/// its git blob hash, the seed and the hash of every file written.
inline void write_run_files(const std::string& dir, const std::string& command, const ExperimentConfig& c,
                            const std::vector<std::pair<std::string, std::string>>& files)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    json manifest;
    manifest["command"] = command;
    manifest["config"] = c.canonical_text();
    manifest["config_hash"] = git_blob_hash(c.canonical_text());
    manifest["seed"] = c.seed;
    json hashes = json::object();
    for (const auto& [name, content] : files) {
        std::ofstream f(fs::path(dir) / name, std::ios::binary);
        if (!f) {
            throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
        }
        f << content;
        hashes[name] = git_blob_hash(content);
    }
    manifest["files"] = std::move(hashes);
    std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << "\n";
}

inline std::string records_jsonl(const std::vector<TrialRecord>& records)
{
    std::string out;
    for (const auto& r : records) {
        out += trial_to_json(r).dump();
        out += '\n';
    }
    return out;
}

} // namespace hasc
