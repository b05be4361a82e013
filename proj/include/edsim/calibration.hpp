#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edsim/ed_model.hpp"
#include "edsim/experiments.hpp"

namespace edsim {

struct CalibrationOptions {
    double target_los = 98.68;
    double tolerance = 0.10;  // relative half-width of the acceptance band
    int replications = 10;
    std::uint64_t seed = 20240601;
    std::array<int, Capacities::kCount> min_capacity{1, 1, 1, 1, 1, 1, 2};
    std::array<int, Capacities::kCount> max_capacity{3, 3, 4, 8, 3, 3, 2};
    /// Vectors whose offered load exceeds this fraction of any resource's
    /// capacity are skipped without simulation.
    double max_offered_utilization = 0.95;
    int jobs = 1;

    double lower() const { return target_los * (1.0 - tolerance); }
    double upper() const { return target_los * (1.0 + tolerance); }
};

struct CalibrationCandidate {
    Capacities capacities;
    double mean_los = NAN;
    bool in_band = false;
};

struct CalibrationResult {
    std::optional<Capacities> capacities;
    double mean_los = NAN;
    int total_staff = 0;
    std::vector<CalibrationCandidate> evaluated;
};

/// Expected busy units per resource for the baseline (no detours), in the
/// order of Capacities::kNames.
inline std::array<double, Capacities::kCount> offered_load(const EDConfig& cfg) {
    const auto& t = cfg.times;
    const double rate = 1.0 / t.interarrival.analytic_mean();
    const std::array<double, 3> rows{t.first_aid_picu.analytic_mean(), t.first_aid_icu.analytic_mean(),
                                     t.first_aid_ccu.analytic_mean()};
    double mix_total = 0.0;
    for (double w : cfg.acuity_mix) mix_total += w;
    double first_aid = 0.0;
    for (std::size_t i = 0; i < 3; ++i) first_aid += cfg.acuity_mix[i] / mix_total * rows[i];
    const auto sfa = static_cast<std::size_t>(cfg.standard_first_aid);
    if (sfa < 3) first_aid += cfg.acuity_mix[3] / mix_total * rows[sfa];
    const double xray = cfg.p_xray * t.xray.analytic_mean();
    return {rate * t.registration.analytic_mean(),
            rate * t.triage.analytic_mean(),
            rate * first_aid,
            rate * (first_aid + t.treatment.analytic_mean()),
            rate * xray,
            rate * cfg.p_lab * t.lab.analytic_mean(),
            rate * xray};
}

/// Grid search over capacity vectors. Candidates are visited by ascending
/// total headcount; the search stops at the first headcount that puts the
/// baseline mean LOS inside the band and returns the in-band vector of that
/// headcount closest to the target (lexicographically smallest on ties).
inline CalibrationResult calibrate_capacities(const EDConfig& base, const CalibrationOptions& opt,
                                              const std::function<void(const CalibrationCandidate&)>& progress = {}) {
    base.validate();
    if (opt.replications < 2) throw std::invalid_argument("calibrate: replications must be >= 2");
    for (std::size_t i = 0; i < Capacities::kCount; ++i)
        if (opt.min_capacity[i] < 0 || opt.min_capacity[i] > opt.max_capacity[i])
            throw std::invalid_argument("calibrate: bad bounds for " + std::string(Capacities::kNames[i]));

    const auto load = offered_load(base);
    std::array<int, Capacities::kCount> floor_cap{};
    int lo_total = 0, hi_total = 0;
    for (std::size_t i = 0; i < Capacities::kCount; ++i) {
        int need = opt.min_capacity[i];
        while (need <= opt.max_capacity[i] && load[i] > opt.max_offered_utilization * need) ++need;
        floor_cap[i] = need;
        lo_total += need;
        hi_total += opt.max_capacity[i];
    }

    CalibrationResult result;
    for (std::size_t i = 0; i < Capacities::kCount; ++i)
        if (floor_cap[i] > opt.max_capacity[i]) return result;

    const ScenarioSpec baseline{"Baseline", {}, false};
    for (int total = lo_total; total <= hi_total; ++total) {
        std::vector<CalibrationCandidate> level;
        std::array<int, Capacities::kCount> c{};
        // Enumerate vectors with sum == total inside [floor_cap, max] in lexicographic order.
        std::function<void(std::size_t, int)> rec = [&](std::size_t i, int remaining) {
            if (i + 1 == Capacities::kCount) {
                if (remaining < floor_cap[i] || remaining > opt.max_capacity[i]) return;
                c[i] = remaining;
                EDConfig cfg = base;
                for (std::size_t k = 0; k < Capacities::kCount; ++k) cfg.capacities[k] = c[k];
                CalibrationCandidate cand;
                cand.capacities = cfg.capacities;
                cand.mean_los = run_scenario(cfg, baseline, opt.replications, opt.seed, opt.jobs).mean_los;
                cand.in_band = cand.mean_los >= opt.lower() && cand.mean_los <= opt.upper();
                if (progress) progress(cand);
                level.push_back(cand);
                return;
            }
            for (int v = floor_cap[i]; v <= opt.max_capacity[i] && v <= remaining; ++v) {
                c[i] = v;
                rec(i + 1, remaining - v);
            }
        };
        rec(0, total);
        result.evaluated.insert(result.evaluated.end(), level.begin(), level.end());

        const CalibrationCandidate* best = nullptr;
        for (const auto& cand : level)
            if (cand.in_band &&
                (!best || std::abs(cand.mean_los - opt.target_los) < std::abs(best->mean_los - opt.target_los)))
                best = &cand;
        if (best) {
            result.capacities = best->capacities;
            result.mean_los = best->mean_los;
            result.total_staff = total;
            return result;
        }
    }
    return result;
}

}  // namespace edsim
