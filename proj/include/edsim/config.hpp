#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edsim/calibration.hpp"
#include "edsim/ed_model.hpp"
#include "edsim/experiments.hpp"
#include "edsim/tree.hpp"

namespace edsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatagenParams {
    std::size_t n_records = 500;
    double train_fraction = 0.7;
    int knn_k = 1;
};

struct ExperimentParams {
    int reps = 30;
    int jobs = 1;
    std::vector<std::string> scenarios{"Baseline", "Baseline+ML", "A", "A+ML", "B", "B+ML"};
    /// "published": the five published rules; "dt2": rules extracted from a DT2
    /// trained on freshly generated records.
    std::string ruleset = "published";
};

struct RunConfig {
    std::uint64_t seed = 20240601;
    std::string out = "out";
    EDConfig ed;  // ed.population is shared with datagen
    TreeParams tree;
    DatagenParams datagen;
    ExperimentParams experiment;
    CalibrationOptions calibration;

    void validate() const;
};

namespace detail {

using json = nlohmann::json;

struct ConfigKey {
    std::string path;
    std::string help;
    std::function<json(const RunConfig&)> get;
    std::function<void(RunConfig&, const json&)> set;
};

template <class T>
T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(path + ": expected true/false");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(path + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(path + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(path + ": expected a string");
    }
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

template <class T, class Ref>
ConfigKey key(std::string path, std::string help, Ref ref) {
    return {path, std::move(help), [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); },
            [ref, path](RunConfig& c, const json& v) { ref(c) = convert<T>(v, path); }};
}

template <std::size_t N, class Ref>
ConfigKey array_key(std::string path, std::string help, Ref ref) {
    return {path, std::move(help), [ref](const RunConfig& c) { return json(ref(const_cast<RunConfig&>(c))); },
            [ref, path](RunConfig& c, const json& v) {
                if (!v.is_array() || v.size() != N)
                    throw ConfigError(path + ": expected an array of " + std::to_string(N) + " numbers");
                std::array<double, N> out{};
                for (std::size_t i = 0; i < N; ++i) out[i] = convert<double>(v[i], path);
                ref(c) = out;
            }};
}

inline std::vector<ConfigKey> build_keys() {
    std::vector<ConfigKey> k;
    k.push_back(key<std::uint64_t>("seed", "master seed for every random stream",
                                   [](RunConfig& c) -> auto& { return c.seed; }));
    k.push_back(key<std::string>("out", "output directory", [](RunConfig& c) -> auto& { return c.out; }));

    // population
    auto pop = [](RunConfig& c) -> PopulationSpec& { return c.ed.population; };
    k.push_back(key<double>("population.age_mean", "mean patient age (years)",
                            [pop](RunConfig& c) -> auto& { return pop(c).age_mean; }));
    k.push_back(key<double>("population.age_sd", "age standard deviation (years)",
                            [pop](RunConfig& c) -> auto& { return pop(c).age_sd; }));
    k.push_back(key<double>("population.age_min", "lower truncation of age",
                            [pop](RunConfig& c) -> auto& { return pop(c).age_min; }));
    k.push_back(key<double>("population.age_max", "upper truncation of age (<= 105)",
                            [pop](RunConfig& c) -> auto& { return pop(c).age_max; }));
    k.push_back(key<bool>("population.age_match_moments",
                          "re-parameterize the truncated normal so its own mean/sd equal age_mean/age_sd",
                          [pop](RunConfig& c) -> auto& { return pop(c).age_match_moments; }));
    k.push_back(key<double>("population.p_female", "probability a patient is female",
                            [pop](RunConfig& c) -> auto& { return pop(c).p_female; }));
    k.push_back(array_key<7>("population.day_weights", "arrival day weights, Mon..Sun (datagen only)",
                             [pop](RunConfig& c) -> auto& { return pop(c).day_weights; }));
    k.push_back(array_key<24>("population.hour_weights", "arrival hour weights, 0..23 (datagen only)",
                              [pop](RunConfig& c) -> auto& { return pop(c).hour_weights; }));
    k.push_back(array_key<5>("population.triage_weights", "triage level weights, L1..L5",
                             [pop](RunConfig& c) -> auto& { return pop(c).triage_weights; }));
    k.push_back(key<double>("population.p_xray", "x-ray prevalence in generated records",
                            [pop](RunConfig& c) -> auto& { return pop(c).p_xray; }));
    k.push_back(key<double>("population.p_lab", "lab-test prevalence in generated records",
                            [pop](RunConfig& c) -> auto& { return pop(c).p_lab; }));
    k.push_back(key<double>("population.label_noise", "total probability that a label disagrees with the latent rule",
                            [pop](RunConfig& c) -> auto& { return pop(c).label_noise; }));
    k.push_back({"population.target_admit_rate",
                 "expected admitted fraction after label noise; null keeps symmetric flips",
                 [pop](const RunConfig& c) {
                     const auto& t = pop(const_cast<RunConfig&>(c)).target_admit_rate;
                     return t ? json(*t) : json(nullptr);
                 },
                 [pop](RunConfig& c, const json& v) {
                     if (v.is_null())
                         pop(c).target_admit_rate.reset();
                     else
                         pop(c).target_admit_rate = convert<double>(v, "population.target_admit_rate");
                 }});

    // ed
    for (std::size_t i = 0; i < Capacities::kCount; ++i)
        k.push_back(key<int>("ed.capacities." + std::string(Capacities::kNames[i]), "units available",
                             [i](RunConfig& c) -> int& { return c.ed.capacities[i]; }));
    k.push_back(key<double>("ed.p_lab", "probability a patient needs a lab test",
                            [](RunConfig& c) -> auto& { return c.ed.p_lab; }));
    k.push_back(key<double>("ed.p_xray", "probability a patient needs an x-ray",
                            [](RunConfig& c) -> auto& { return c.ed.p_xray; }));
    k.push_back(array_key<4>("ed.acuity_mix", "acuity weights PICU, ICU, CCU, Standard",
                             [](RunConfig& c) -> auto& { return c.ed.acuity_mix; }));
    k.push_back({"ed.standard_first_aid", "first-aid duration row for standard patients: PICU, ICU, CCU or none",
                 [](const RunConfig& c) {
                     return json(std::string(kStandardFirstAidNames[static_cast<std::size_t>(c.ed.standard_first_aid)]));
                 },
                 [](RunConfig& c, const json& v) {
                     const auto s = convert<std::string>(v, "ed.standard_first_aid");
                     for (std::size_t i = 0; i < kStandardFirstAidNames.size(); ++i)
                         if (s == kStandardFirstAidNames[i]) {
                             c.ed.standard_first_aid = static_cast<StandardFirstAid>(i);
                             return;
                         }
                     throw ConfigError("ed.standard_first_aid: unknown value '" + s + "'");
                 }});
    k.push_back(key<double>("ed.bed_available_prob", "probability an inpatient bed is free for a predicted admission",
                            [](RunConfig& c) -> auto& { return c.ed.bed_available_prob; }));
    k.push_back(key<double>("ed.horizon", "arrival horizon per replication (minutes)",
                            [](RunConfig& c) -> auto& { return c.ed.horizon; }));
    k.push_back(key<double>("ed.warmup", "patients arriving before this time are excluded (minutes)",
                            [](RunConfig& c) -> auto& { return c.ed.warmup; }));

    auto mean_key = [&](const std::string& name, auto ref) {
        k.push_back(key<double>("ed.times." + name + ".mean", "exponential mean (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).mean; }));
    };
    auto uniform_key = [&](const std::string& name, auto ref) {
        k.push_back(key<double>("ed.times." + name + ".low", "uniform lower bound (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).low; }));
        k.push_back(key<double>("ed.times." + name + ".high", "uniform upper bound (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).high; }));
    };
    auto tri_key = [&](const std::string& name, auto ref) {
        k.push_back(key<double>("ed.times." + name + ".low", "triangular minimum (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).low; }));
        k.push_back(key<double>("ed.times." + name + ".mode", "triangular mode (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).mode; }));
        k.push_back(key<double>("ed.times." + name + ".high", "triangular maximum (minutes)",
                                [ref](RunConfig& c) -> double& { return ref(c).high; }));
    };
    mean_key("interarrival", [](RunConfig& c) -> auto& { return c.ed.times.interarrival; });
    uniform_key("registration", [](RunConfig& c) -> auto& { return c.ed.times.registration; });
    tri_key("triage", [](RunConfig& c) -> auto& { return c.ed.times.triage; });
    uniform_key("first_aid_picu", [](RunConfig& c) -> auto& { return c.ed.times.first_aid_picu; });
    uniform_key("first_aid_icu", [](RunConfig& c) -> auto& { return c.ed.times.first_aid_icu; });
    uniform_key("first_aid_ccu", [](RunConfig& c) -> auto& { return c.ed.times.first_aid_ccu; });
    tri_key("lab", [](RunConfig& c) -> auto& { return c.ed.times.lab; });
    tri_key("xray", [](RunConfig& c) -> auto& { return c.ed.times.xray; });
    uniform_key("treatment", [](RunConfig& c) -> auto& { return c.ed.times.treatment; });

    // tree, datagen
    k.push_back(key<int>("tree.max_depth", "maximum tree depth", [](RunConfig& c) -> auto& { return c.tree.max_depth; }));
    k.push_back(key<int>("tree.min_leaf", "minimum records per leaf", [](RunConfig& c) -> auto& { return c.tree.min_leaf; }));
    k.push_back(key<double>("tree.min_gini_gain", "smallest impurity decrease worth a split",
                            [](RunConfig& c) -> auto& { return c.tree.min_gini_gain; }));
    k.push_back(key<std::size_t>("datagen.n_records", "records written by datagen",
                                 [](RunConfig& c) -> auto& { return c.datagen.n_records; }));
    k.push_back(key<double>("datagen.train_fraction", "share of records used for training",
                            [](RunConfig& c) -> auto& { return c.datagen.train_fraction; }));
    k.push_back(key<int>("datagen.knn_k", "neighbours for the kNN baseline",
                         [](RunConfig& c) -> auto& { return c.datagen.knn_k; }));

    // experiment
    k.push_back(key<int>("experiment.reps", "replications per scenario",
                         [](RunConfig& c) -> auto& { return c.experiment.reps; }));
    k.push_back(key<int>("experiment.jobs", "worker threads for replications",
                         [](RunConfig& c) -> auto& { return c.experiment.jobs; }));
    k.push_back(key<std::vector<std::string>>("experiment.scenarios", "scenarios to run (Baseline is always added)",
                                              [](RunConfig& c) -> auto& { return c.experiment.scenarios; }));
    k.push_back(key<std::string>("experiment.ruleset", "detour rules: published or dt2",
                                 [](RunConfig& c) -> auto& { return c.experiment.ruleset; }));

    // calibration
    k.push_back(key<double>("calibration.target_los", "baseline mean LOS to hit (minutes)",
                            [](RunConfig& c) -> auto& { return c.calibration.target_los; }));
    k.push_back(key<double>("calibration.tolerance", "accepted relative deviation from target_los",
                            [](RunConfig& c) -> auto& { return c.calibration.tolerance; }));
    k.push_back(key<int>("calibration.replications", "replications per candidate vector",
                         [](RunConfig& c) -> auto& { return c.calibration.replications; }));
    k.push_back(key<std::uint64_t>("calibration.seed", "seed for candidate evaluation",
                                   [](RunConfig& c) -> auto& { return c.calibration.seed; }));
    k.push_back(key<double>("calibration.max_offered_utilization", "skip vectors loading any resource beyond this",
                            [](RunConfig& c) -> auto& { return c.calibration.max_offered_utilization; }));
    for (std::size_t i = 0; i < Capacities::kCount; ++i) {
        const std::string name(Capacities::kNames[i]);
        k.push_back(key<int>("calibration.min." + name, "grid lower bound",
                             [i](RunConfig& c) -> int& { return c.calibration.min_capacity[i]; }));
        k.push_back(key<int>("calibration.max." + name, "grid upper bound",
                             [i](RunConfig& c) -> int& { return c.calibration.max_capacity[i]; }));
    }
    return k;
}

inline const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

inline void flatten(const json& node, const std::string& prefix, std::map<std::string, json>& out) {
    if (node.is_object()) {
        for (const auto& [name, child] : node.items()) flatten(child, prefix.empty() ? name : prefix + "." + name, out);
        return;
    }
    out[prefix] = node;
}

}  // namespace detail

inline void RunConfig::validate() const {
    try {
        ed.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (tree.max_depth < 0) throw ConfigError("tree.max_depth must be >= 0");
    if (tree.min_leaf < 1) throw ConfigError("tree.min_leaf must be >= 1");
    if (!(datagen.train_fraction > 0.0 && datagen.train_fraction < 1.0))
        throw ConfigError("datagen.train_fraction must lie in (0,1)");
    if (datagen.knn_k < 1) throw ConfigError("datagen.knn_k must be >= 1");
    if (experiment.reps < 2) throw ConfigError("experiment.reps must be >= 2");
    if (experiment.jobs < 1) throw ConfigError("experiment.jobs must be >= 1");
    if (experiment.ruleset != "published" && experiment.ruleset != "dt2")
        throw ConfigError("experiment.ruleset must be 'published' or 'dt2'");
    for (const auto& s : experiment.scenarios)
        if (!find_standard_scenario(s)) throw ConfigError("experiment.scenarios: unknown scenario '" + s + "'");
    if (calibration.replications < 2) throw ConfigError("calibration.replications must be >= 2");
    for (std::size_t i = 0; i < Capacities::kCount; ++i)
        if (calibration.min_capacity[i] < 0 || calibration.min_capacity[i] > calibration.max_capacity[i])
            throw ConfigError("calibration bounds invalid for " + std::string(Capacities::kNames[i]));
}

/// Applies a JSON document on top of `cfg`. Keys are dotted paths into nested
/// objects; any key outside the documented set is rejected.
inline void apply_config(RunConfig& cfg, const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be an object");
    std::map<std::string, nlohmann::json> flat;
    detail::flatten(doc, "", flat);
    const auto& keys = detail::config_keys();
    for (const auto& [path, value] : flat) {
        if (path.empty()) continue;
        const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.path == path; });
        if (it == keys.end()) throw ConfigError("config: unknown key '" + path + "'");
        it->set(cfg, value);
    }
}

inline RunConfig parse_config(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    RunConfig cfg;
    apply_config(cfg, doc);
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

/// Full nested JSON document for `cfg` (every key present).
inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& k : detail::config_keys()) doc[nlohmann::json::json_pointer("/" + [&] {
        std::string p = k.path;
        std::replace(p.begin(), p.end(), '.', '/');
        return p;
    }())] = k.get(cfg);
    return doc;
}

/// Human-readable list of every key, its default and meaning.
inline std::string config_reference() {
    const RunConfig defaults;
    std::ostringstream out;
    out << "# edsim configuration reference\n"
           "# JSON with nested sections; a dotted key a.b.c is written as {\"a\": {\"b\": {\"c\": ...}}}.\n"
           "# Unknown keys are rejected. Omitted keys keep the default shown.\n\n";
    for (const auto& k : detail::config_keys())
        out << k.path << " = " << k.get(defaults).dump() << "\n    " << k.help << '\n';
    out << "\n# Default configuration as a complete file:\n" << to_json(defaults).dump(2) << '\n';
    return out.str();
}

}  // namespace edsim
