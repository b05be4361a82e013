#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "edsim/config.hpp"
#include "edsim/experiments.hpp"
#include "edsim/knn.hpp"
#include "edsim/metrics.hpp"
#include "edsim/population.hpp"
#include "edsim/tree.hpp"

namespace edsim {

// Substreams reserved for the classifier pipeline; far above any replication family.
inline constexpr std::uint64_t kDatagenSubstream = 0xD000'0000'0000'0001ull;
inline constexpr std::uint64_t kSplitSubstream = 0xD000'0000'0000'0002ull;

inline std::vector<PatientRecord> generate_dataset(const RunConfig& cfg) {
    RandomStream s(cfg.seed, kDatagenSubstream);
    return generate_records(cfg.datagen.n_records, s, cfg.ed.population);
}

struct ModelResult {
    std::string name;
    Evaluation eval;
};

struct TrainingOutput {
    DecisionTree dt1, dt2;
    std::vector<ModelResult> models;  // DT1, DT2, kNN
    std::size_t n_train = 0, n_test = 0;
    std::optional<std::string> warning;
};

/// 70/30-style split, then DT1 (all features), DT2 (triage-time features)
/// and kNN on (age, hour), each scored on the held-out part.
inline TrainingOutput train_models(const std::vector<PatientRecord>& records, const RunConfig& cfg) {
    RandomStream s(cfg.seed, kSplitSubstream);
    auto split = split_train_test(records, cfg.datagen.train_fraction, s);
    if (split.train.empty() || split.test.empty())
        throw std::runtime_error("train: need at least one training and one test record (have " +
                                 std::to_string(records.size()) + ")");
    TrainingOutput out;
    out.n_train = split.train.size();
    out.n_test = split.test.size();
    out.warning = split.warning;
    out.dt1 = train_tree(split.train, {kAllFeatures.begin(), kAllFeatures.end()}, cfg.tree);
    out.dt2 = train_tree(split.train, {kTriageTimeFeatures.begin(), kTriageTimeFeatures.end()}, cfg.tree);
    const KnnClassifier knn(split.train, cfg.datagen.knn_k);

    std::vector<bool> labels, p1, p2, pk;
    for (const auto& r : split.test) {
        labels.push_back(r.admitted);
        p1.push_back(out.dt1.predict(r));
        p2.push_back(out.dt2.predict(r));
        pk.push_back(knn.predict(r));
    }
    out.models.push_back({"DT1", evaluate(p1, labels)});
    out.models.push_back({"DT2", evaluate(p2, labels)});
    out.models.push_back({"kNN (k=" + std::to_string(cfg.datagen.knn_k) + ")", evaluate(pk, labels)});
    return out;
}

inline std::string format_optional(const std::optional<double>& x, const char* fmt) {
    if (!x) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, *x);
    return buf;
}

inline constexpr std::string_view kMetricsCsvHeader = "model,tp,fp,tn,fn,accuracy,sensitivity,specificity";

inline std::string metrics_csv(const TrainingOutput& t) {
    std::ostringstream out;
    out << kMetricsCsvHeader << '\n';
    char buf[256];
    for (const auto& m : t.models) {
        const auto& c = m.eval.cm;
        std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%llu,%llu,%.17g,", m.name.c_str(),
                      static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fp),
                      static_cast<unsigned long long>(c.tn), static_cast<unsigned long long>(c.fn), m.eval.accuracy);
        out << buf << format_optional(m.eval.sensitivity, "%.17g") << ','
            << format_optional(m.eval.specificity, "%.17g") << '\n';
    }
    return out.str();
}

inline std::string metrics_table(const TrainingOutput& t) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-12s %9s %12s %12s\n", "Model", "Accuracy", "Specificity", "Sensitivity");
    out << buf << std::string(48, '-') << '\n';
    for (const auto& m : t.models) {
        std::snprintf(buf, sizeof buf, "%-12s %9.2f %12s %12s\n", m.name.c_str(), m.eval.accuracy,
                      format_optional(m.eval.specificity, "%.2f").c_str(),
                      format_optional(m.eval.sensitivity, "%.2f").c_str());
        out << buf;
    }
    out << std::string(48, '-') << '\n'
        << "train " << t.n_train << " / test " << t.n_test << " records\n";
    return out.str();
}

/// Detour rules the simulation should use under this configuration.
inline RuleSet simulation_rules(const RunConfig& cfg) {
    if (cfg.experiment.ruleset == "published") return paper_ruleset();
    return extract_rules(train_models(generate_dataset(cfg), cfg).dt2);
}

/// Requested scenarios, Baseline first, duplicates dropped, standard order kept.
inline std::vector<ScenarioSpec> resolve_scenarios(const std::vector<std::string>& names) {
    std::vector<ScenarioSpec> out;
    for (const auto& s : standard_scenarios()) {
        bool wanted = s.name == "Baseline";
        for (const auto& n : names)
            if (auto f = find_standard_scenario(n); f && f->name == s.name) wanted = true;
        if (wanted) out.push_back(s);
    }
    for (const auto& n : names)
        if (!find_standard_scenario(n)) throw ConfigError("unknown scenario '" + n + "'");
    return out;
}

inline std::vector<std::pair<ScenarioSpec, ScenarioResult>> run_experiment(const RunConfig& cfg) {
    EDConfig base = cfg.ed;
    base.ruleset = simulation_rules(cfg);
    std::vector<std::pair<ScenarioSpec, ScenarioResult>> runs;
    for (const auto& spec : resolve_scenarios(cfg.experiment.scenarios))
        runs.emplace_back(spec, run_scenario(base, spec, cfg.experiment.reps, cfg.seed, cfg.experiment.jobs));
    return runs;
}

/// File-name form of a scenario name: "B+ML" -> "b_ml".
inline std::string scenario_slug(const std::string& name) {
    std::string out;
    for (char c : name) out += c == '+' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace edsim
