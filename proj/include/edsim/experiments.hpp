#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "edsim/ed_model.hpp"

namespace edsim {

struct ScenarioSpec {
    std::string name;
    std::map<std::string, int> capacity_deltas;  // keyed by Capacities::kNames
    bool ml_enabled = false;
};

inline std::vector<ScenarioSpec> standard_scenarios() {
    return {
        {"Baseline", {}, false},
        {"Baseline+ML", {}, true},
        {"A", {{"nurses", 1}}, false},
        {"A+ML", {{"nurses", 1}}, true},
        {"B", {{"nurses", 1}, {"orderlies", 1}}, false},
        {"B+ML", {{"nurses", 1}, {"orderlies", 1}}, true},
    };
}

/// Case-insensitive lookup among the standard scenarios ("baseline", "a+ml", ...).
inline std::optional<ScenarioSpec> find_standard_scenario(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    for (auto& s : standard_scenarios())
        if (lower(s.name) == lower(name)) return s;
    return std::nullopt;
}

inline EDConfig apply_scenario(const EDConfig& base, const ScenarioSpec& spec) {
    EDConfig cfg = base;
    for (const auto& [resource, delta] : spec.capacity_deltas) {
        const auto it = std::find(Capacities::kNames.begin(), Capacities::kNames.end(), resource);
        if (it == Capacities::kNames.end())
            throw std::invalid_argument("scenario " + spec.name + ": unknown resource '" + resource + "'");
        int& cap = cfg.capacities[static_cast<std::size_t>(it - Capacities::kNames.begin())];
        cap += delta;
        if (cap < 0) throw std::invalid_argument("scenario " + spec.name + ": negative capacity for " + resource);
    }
    cfg.ml_enabled = spec.ml_enabled;
    return cfg;
}

// Sample statistics -------------------------------------------------------

inline double sample_mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = sample_mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

/// Two-sided tail probability of Student's t with (possibly fractional) df.
inline double t_two_sided_p(double t, double df) {
    if (std::isinf(t)) return 0.0;
    if (t == 0.0) return 1.0;
    boost::math::students_t_distribution<double> dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Welch's unequal-variance two-sample t-test with Welch-Satterthwaite df.
/// Both variances zero: t = 0, p = 1 when means agree, otherwise t = +-inf, p = 0.
inline WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_t: each sample needs at least 2 values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = sample_mean(a), mb = sample_mean(b);
    const double va = sample_variance(a) / na, vb = sample_variance(b) / nb;
    WelchResult r;
    if (va + vb == 0.0) {
        r.df = na + nb - 2.0;
        if (ma == mb) return {0.0, r.df, 1.0};
        r.t = ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = t_two_sided_p(r.t, r.df);
    return r;
}

// Scenarios ---------------------------------------------------------------

struct Interval {
    double low = NAN;
    double high = NAN;
};

struct ScenarioResult {
    std::string name;
    std::vector<ReplicationStats> replications;
    std::vector<double> los;   // per-replication mean LOS
    std::vector<double> dtdt;  // per-replication mean DTDT
    double mean_los = NAN, mean_dtdt = NAN;
    double sd_los = NAN, sd_dtdt = NAN;
    Interval ci_los, ci_dtdt;

    std::size_t n_reps() const { return los.size(); }
};

inline Interval confidence_interval_95(std::span<const double> x) {
    const double m = sample_mean(x);
    const double half = boost::math::quantile(
                            boost::math::students_t_distribution<double>(static_cast<double>(x.size() - 1)), 0.975) *
                        std::sqrt(sample_variance(x) / static_cast<double>(x.size()));
    return {m - half, m + half};
}

inline ScenarioResult summarize(std::string name, std::vector<ReplicationStats> reps) {
    ScenarioResult r;
    r.name = std::move(name);
    for (const auto& s : reps) {
        r.los.push_back(s.mean_los);
        r.dtdt.push_back(s.mean_dtdt);
    }
    r.replications = std::move(reps);
    r.mean_los = sample_mean(r.los);
    r.mean_dtdt = sample_mean(r.dtdt);
    r.sd_los = std::sqrt(sample_variance(r.los));
    r.sd_dtdt = std::sqrt(sample_variance(r.dtdt));
    r.ci_los = confidence_interval_95(r.los);
    r.ci_dtdt = confidence_interval_95(r.dtdt);
    return r;
}

/// Runs `n_reps` replications on up to `jobs` threads. Replication i of every
/// scenario draws from stream family (master_seed, i), so scenarios share
/// common random numbers. Results are ordered by replication index.
inline ScenarioResult run_scenario(const EDConfig& base, const ScenarioSpec& spec, int n_reps,
                                   std::uint64_t master_seed, int jobs = 1) {
    if (n_reps < 2) throw std::invalid_argument("run_scenario: n_reps must be >= 2");
    const EDConfig cfg = apply_scenario(base, spec);
    cfg.validate();

    std::vector<ReplicationStats> reps(static_cast<std::size_t>(n_reps));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (int i = next++; i < n_reps; i = next++) {
            try {
                reps[static_cast<std::size_t>(i)] = run_replication(cfg, master_seed, static_cast<std::uint64_t>(i));
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, n_reps);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(spec.name, std::move(reps));
}

// Comparison ---------------------------------------------------------------

inline double percent_change(double baseline, double variant) { return 100.0 * (variant - baseline) / baseline; }

struct Comparison {
    double pct_change_los = 0.0;
    double pct_change_dtdt = 0.0;
    WelchResult los;
    WelchResult dtdt;
    bool significant_los = false;
    bool significant_dtdt = false;
    bool significant_at_05 = false;  // both measures
};

inline Comparison compare(const ScenarioResult& baseline, const ScenarioResult& variant, double alpha = 0.05) {
    if (baseline.n_reps() != variant.n_reps())
        throw std::invalid_argument("compare: replication counts differ (" + std::to_string(baseline.n_reps()) +
                                    " vs " + std::to_string(variant.n_reps()) + ")");
    Comparison c;
    c.pct_change_los = percent_change(baseline.mean_los, variant.mean_los);
    c.pct_change_dtdt = percent_change(baseline.mean_dtdt, variant.mean_dtdt);
    c.los = welch_t(variant.los, baseline.los);
    c.dtdt = welch_t(variant.dtdt, baseline.dtdt);
    c.significant_los = c.los.p < alpha;
    c.significant_dtdt = c.dtdt.p < alpha;
    c.significant_at_05 = c.significant_los && c.significant_dtdt;
    return c;
}

// Reporting ----------------------------------------------------------------

struct ReportRow {
    ScenarioSpec spec;
    ScenarioResult result;
    std::optional<Comparison> comparison;  // empty for the baseline row
};

inline constexpr std::string_view kReportCsvHeader = "scenario,mean_los,pct_los,p_los,mean_dtdt,pct_dtdt,p_dtdt,n_reps";

/// Pairs every result with its comparison against the result named "Baseline".
inline std::vector<ReportRow> build_report_rows(const std::vector<std::pair<ScenarioSpec, ScenarioResult>>& runs) {
    const auto base = std::find_if(runs.begin(), runs.end(), [](auto& r) { return r.first.name == "Baseline"; });
    if (base == runs.end()) throw std::invalid_argument("report: Baseline scenario missing");
    std::vector<ReportRow> rows;
    rows.push_back({base->first, base->second, std::nullopt});
    for (auto it = runs.begin(); it != runs.end(); ++it) {
        if (it == base) continue;
        rows.push_back({it->first, it->second, compare(base->second, it->second)});
    }
    return rows;
}

struct Report {
    std::string text;
    std::string csv;
};

inline Report render_report(const std::vector<ReportRow>& rows) {
    const auto base = std::find_if(rows.begin(), rows.end(), [](auto& r) { return !r.comparison; });
    if (base == rows.end() || base->spec.name != "Baseline")
        throw std::invalid_argument("report: Baseline scenario missing");

    std::ostringstream text, csv;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-14s %12s %10s %12s %10s\n", "Scenario", "LOS (min)", "% change", "DTDT (min)",
                  "% change");
    text << buf << std::string(62, '-') << '\n';
    csv << kReportCsvHeader << '\n';

    auto emit = [&](const ReportRow& row) {
        const auto& r = row.result;
        if (!row.comparison) {
            std::snprintf(buf, sizeof buf, "%-14s %11.2f  %10s %11.2f  %10s\n", row.spec.name.c_str(), r.mean_los, "",
                          r.mean_dtdt, "");
            text << buf;
            std::snprintf(buf, sizeof buf, "%s,%.17g,,,%.17g,,,%zu\n", row.spec.name.c_str(), r.mean_los,
                          r.mean_dtdt, r.n_reps());
            csv << buf;
            return;
        }
        const auto& c = *row.comparison;
        std::snprintf(buf, sizeof buf, "%-14s %11.2f%c %9.2f%% %11.2f%c %9.2f%%\n", row.spec.name.c_str(), r.mean_los,
                      c.significant_los ? '*' : ' ', c.pct_change_los, r.mean_dtdt, c.significant_dtdt ? '*' : ' ',
                      c.pct_change_dtdt);
        text << buf;
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu\n", row.spec.name.c_str(),
                      r.mean_los, c.pct_change_los, c.los.p, r.mean_dtdt, c.pct_change_dtdt, c.dtdt.p, r.n_reps());
        csv << buf;
    };
    emit(*base);
    for (auto it = rows.begin(); it != rows.end(); ++it)
        if (it != base) emit(*it);
    text << std::string(62, '-') << '\n'
         << "* Welch t-test vs Baseline significant at p < 0.05 (" << base->result.n_reps()
         << " replications per scenario)\n";
    return {text.str(), csv.str()};
}

inline constexpr std::string_view kReplicationCsvHeader =
    "replication,mean_los,mean_dtdt,patients,critical,detours,unfinished";

inline void write_replications_csv(std::ostream& out, const ScenarioResult& r) {
    out << kReplicationCsvHeader << '\n';
    char buf[256];
    for (std::size_t i = 0; i < r.replications.size(); ++i) {
        const auto& s = r.replications[i];
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%llu,%llu,%llu,%llu\n", i, s.mean_los, s.mean_dtdt,
                      static_cast<unsigned long long>(s.patient_count), static_cast<unsigned long long>(s.critical_count),
                      static_cast<unsigned long long>(s.detour_count),
                      static_cast<unsigned long long>(s.unfinished_count));
        out << buf;
    }
}

/// Rebuilds a ScenarioResult (per-replication means and counts) from its CSV.
inline ScenarioResult read_replications_csv(std::istream& in, std::string name) {
    std::string line;
    if (!std::getline(in, line) || line != kReplicationCsvHeader)
        throw std::runtime_error("replications CSV for " + name + ": unexpected header");
    std::vector<ReplicationStats> reps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ReplicationStats s;
        std::size_t idx = 0;
        unsigned long long patients = 0, critical = 0, detours = 0, unfinished = 0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%llu,%llu,%llu,%llu", &idx, &s.mean_los, &s.mean_dtdt, &patients,
                        &critical, &detours, &unfinished) != 7)
            throw std::runtime_error("replications CSV for " + name + ": malformed line '" + line + "'");
        s.patient_count = patients;
        s.critical_count = critical;
        s.detour_count = detours;
        s.unfinished_count = unfinished;
        reps.push_back(s);
    }
    if (reps.size() < 2) throw std::runtime_error("replications CSV for " + name + ": fewer than 2 replications");
    return summarize(std::move(name), std::move(reps));
}

}  // namespace edsim
