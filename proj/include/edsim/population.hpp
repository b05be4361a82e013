#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edsim/distributions.hpp"
#include "edsim/patient.hpp"
#include "edsim/rng.hpp"
#include "edsim/rules.hpp"

namespace edsim {

/// Marginals of the synthetic patient population plus the latent labeling rule.
///
/// Defaults follow the published summary table. Where that table is partial,
/// the remainder is completed as follows: days Sat/Mon/Thu share the missing
/// 22.5% equally, triage L2 takes the missing 2.4%, and the 18 unlisted hours
/// share the missing 60.5% equally.
struct PopulationSpec {
    double age_mean = 31.7;
    double age_sd = 24.4;
    double age_min = 0.0;
    double age_max = 105.0;
    /// When true the truncated normal is re-parameterized so that the
    /// *truncated* age distribution has exactly age_mean / age_sd.
    bool age_match_moments = true;

    double p_female = 0.519;
    // Mon Tue Wed Thu Fri Sat Sun
    std::array<double, 7> day_weights{0.075, 0.175, 0.209, 0.075, 0.214, 0.075, 0.177};
    std::array<double, 24> hour_weights = default_hour_weights();
    // L1 L2 L3 L4 L5
    std::array<double, 5> triage_weights{0.0, 0.024, 0.494, 0.482, 0.0};
    double p_xray = 0.544;
    double p_lab = 0.522;

    /// Overall probability that a label disagrees with the latent rule.
    double label_noise = 0.10;
    /// If set, flips are split asymmetrically between latent positives and
    /// negatives so the expected admit fraction equals this value.
    std::optional<double> target_admit_rate = 0.201;
    RuleSet latent_rule = paper_ruleset();

    static std::array<double, 24> default_hour_weights() {
        std::array<double, 24> w{};
        const double listed[][2] = {{16, 0.067}, {17, 0.063}, {18, 0.077}, {19, 0.058}, {21, 0.067}, {22, 0.063}};
        double listed_total = 0.0;
        for (auto& [h, p] : listed) listed_total += p;
        w.fill((1.0 - listed_total) / 18.0);
        for (auto& [h, p] : listed) w[static_cast<std::size_t>(h)] = p;
        return w;
    }

    void validate() const {
        auto prob = [](double p, const char* what) {
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("population: ") + what + " not in [0,1]");
        };
        prob(p_female, "p_female");
        prob(p_xray, "p_xray");
        prob(p_lab, "p_lab");
        prob(label_noise, "label_noise");
        if (target_admit_rate) prob(*target_admit_rate, "target_admit_rate");
        if (!(age_min < age_max) || age_min < 0.0 || age_max > 105.0)
            throw std::invalid_argument("population: age bounds must satisfy 0 <= min < max <= 105");
        // Categorical constructors reject negative or all-zero weight vectors.
        Categorical({"", "", "", "", "", "", ""}, {day_weights.begin(), day_weights.end()});
        Categorical(std::vector<std::string>(24), {hour_weights.begin(), hour_weights.end()});
        Categorical({"", "", "", "", ""}, {triage_weights.begin(), triage_weights.end()});
    }
};

inline TruncatedNormal age_distribution(const PopulationSpec& spec) {
    if (spec.age_match_moments)
        return TruncatedNormal::with_moments(spec.age_mean, spec.age_sd, spec.age_min, spec.age_max);
    return TruncatedNormal(spec.age_mean, spec.age_sd, spec.age_min, spec.age_max);
}

/// Exact probability that a record drawn from the PopulationSpec marginals satisfies
/// `rules`. Integrates over piecewise-constant cells: categorical combinations,
/// hour pieces (hour bins split at every hour threshold in the rules) and age
/// pieces (split at every age threshold), evaluating the rules at cell midpoints.
inline double rule_match_probability(const PopulationSpec& spec, const RuleSet& rules) {
    const TruncatedNormal age = age_distribution(spec);
    std::set<double> age_cuts{spec.age_min, spec.age_max};
    std::set<double> hour_cuts;
    for (int h = 0; h <= 24; ++h) hour_cuts.insert(h);
    for (const auto& clause : rules.clauses)
        for (const auto& c : clause.conditions())
            if (const auto* n = std::get_if<NumericCondition>(&c)) {
                auto& cuts = n->feature == Feature::Age ? age_cuts : hour_cuts;
                const double lo = n->feature == Feature::Age ? spec.age_min : 0.0;
                const double hi = n->feature == Feature::Age ? spec.age_max : 24.0;
                for (const auto& b : {n->lower, n->upper})
                    if (b && b->value > lo && b->value < hi) cuts.insert(b->value);
            }
    const std::vector<double> ages(age_cuts.begin(), age_cuts.end());
    const std::vector<double> hours(hour_cuts.begin(), hour_cuts.end());

    const auto normalize = [](auto arr) {
        const double t = std::accumulate(arr.begin(), arr.end(), 0.0);
        for (auto& x : arr) x /= t;
        return arr;
    };
    const auto days = normalize(spec.day_weights);
    const auto hw = normalize(spec.hour_weights);
    const auto tri = normalize(spec.triage_weights);

    double total = 0.0;
    PatientRecord r;
    for (int g = 0; g < 2; ++g) {
        const double pg = g == 0 ? spec.p_female : 1.0 - spec.p_female;
        r.gender = static_cast<Gender>(g);
        for (int t = 0; t < 5; ++t) {
            r.triage = static_cast<Triage>(t);
            for (int x = 0; x < 2; ++x) {
                r.xray = x == 1;
                for (int l = 0; l < 2; ++l) {
                    r.lab = l == 1;
                    const double pc = pg * tri[t] * (x ? spec.p_xray : 1.0 - spec.p_xray) *
                                      (l ? spec.p_lab : 1.0 - spec.p_lab);
                    if (pc == 0.0) continue;
                    for (int d = 0; d < 7; ++d) {
                        if (days[d] == 0.0) continue;
                        r.arrival_day = static_cast<Weekday>(d);
                        for (std::size_t hi = 0; hi + 1 < hours.size(); ++hi) {
                            const double h0 = hours[hi], h1 = hours[hi + 1];
                            const double ph = hw[static_cast<std::size_t>(h0)] * (h1 - h0);
                            if (ph == 0.0) continue;
                            r.arrival_hour = 0.5 * (h0 + h1);
                            for (std::size_t ai = 0; ai + 1 < ages.size(); ++ai) {
                                r.age = 0.5 * (ages[ai] + ages[ai + 1]);
                                if (!rules.admits(r)) continue;
                                total += pc * days[d] * ph * (age.cdf(ages[ai + 1]) - age.cdf(ages[ai]));
                            }
                        }
                    }
                }
            }
        }
    }
    return total;
}

/// Per-class label flip probabilities for a given latent positive rate.
struct LabelNoise {
    double flip_positive = 0.0;  // latent admit -> label not admitted
    double flip_negative = 0.0;  // latent not admitted -> label admit
};

inline LabelNoise label_noise_for(const PopulationSpec& spec, double latent_rate) {
    const double eps = spec.label_noise;
    if (!spec.target_admit_rate) return {eps, eps};
    const double target = *spec.target_admit_rate;
    const double pi = latent_rate;
    // Solve  pi*a + (1-pi)*b = eps  and  pi*(1-a) + (1-pi)*b = target.
    LabelNoise n;
    n.flip_positive = pi > 0.0 ? (pi + eps - target) / (2.0 * pi) : 0.0;
    n.flip_negative = pi < 1.0 ? (eps - pi + target) / (2.0 * (1.0 - pi)) : 0.0;
    const auto ok = [](double p) { return p >= -1e-12 && p <= 1.0 + 1e-12; };
    if (!ok(n.flip_positive) || !ok(n.flip_negative))
        throw std::invalid_argument("population: label_noise " + std::to_string(eps) +
                                    " cannot move latent admit rate " + std::to_string(pi) + " to target " +
                                    std::to_string(target));
    n.flip_positive = std::clamp(n.flip_positive, 0.0, 1.0);
    n.flip_negative = std::clamp(n.flip_negative, 0.0, 1.0);
    return n;
}

/// Draws the non-label fields of one record; consumes exactly eight uniforms.
class RecordSampler {
public:
    explicit RecordSampler(const PopulationSpec& spec)
        : age_(age_distribution(spec)),
          p_female_(spec.p_female),
          day_({"", "", "", "", "", "", ""}, {spec.day_weights.begin(), spec.day_weights.end()}),
          hour_(std::vector<std::string>(24), {spec.hour_weights.begin(), spec.hour_weights.end()}),
          triage_({"", "", "", "", ""}, {spec.triage_weights.begin(), spec.triage_weights.end()}),
          p_xray_(spec.p_xray),
          p_lab_(spec.p_lab) {}

    PatientRecord draw(RandomStream& s) const {
        PatientRecord r;
        r.age = age_.sample(s);
        r.gender = s.uniform01() < p_female_ ? Gender::F : Gender::M;
        r.arrival_day = static_cast<Weekday>(day_.index_for(s.uniform01()));
        const double bin = static_cast<double>(hour_.index_for(s.uniform01()));
        r.arrival_hour = std::min(bin + s.uniform01(), std::nextafter(24.0, 0.0));
        r.triage = static_cast<Triage>(triage_.index_for(s.uniform01()));
        r.xray = s.uniform01() < p_xray_;
        r.lab = s.uniform01() < p_lab_;
        return r;
    }

    const TruncatedNormal& age() const { return age_; }

private:
    TruncatedNormal age_;
    double p_female_;
    Categorical day_, hour_, triage_;
    double p_xray_, p_lab_;
};

/// n synthetic records: fields drawn independently from their marginals, label
/// from the latent rule followed by a class-dependent flip.
inline std::vector<PatientRecord> generate_records(std::size_t n, RandomStream& stream, const PopulationSpec& spec) {
    spec.validate();
    std::vector<PatientRecord> out;
    if (n == 0) return out;
    const RecordSampler sampler(spec);
    const LabelNoise noise = label_noise_for(spec, rule_match_probability(spec, spec.latent_rule));
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PatientRecord r = sampler.draw(stream);
        const bool latent = spec.latent_rule.admits(r);
        const double u = stream.uniform01();
        r.admitted = latent ? !(u < noise.flip_positive) : (u < noise.flip_negative);
        out.push_back(r);
    }
    return out;
}

struct TrainTestSplit {
    std::vector<PatientRecord> train;
    std::vector<PatientRecord> test;
    std::optional<std::string> warning;
};

/// Random partition without replacement; the training side gets round(n * f)
/// records (halves round up). Shuffling is a Fisher-Yates pass driven by the
/// stream, so the partition is reproducible across standard libraries.
inline TrainTestSplit split_train_test(std::span<const PatientRecord> records, double train_fraction,
                                       RandomStream& stream) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: train_fraction must lie in (0,1)");
    const std::size_t n = records.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(stream.uniform01() * static_cast<double>(i));
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 0.5));
    TrainTestSplit out;
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? out.train : out.test).push_back(records[order[i]]);
    if (n > 0 && (out.train.empty() || out.test.empty()))
        out.warning = "split_train_test: degenerate split (" + std::to_string(out.train.size()) + " train / " +
                      std::to_string(out.test.size()) + " test)";
    return out;
}

}  // namespace edsim
