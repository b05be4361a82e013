// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "edsim/calendar.hpp"
#include "edsim/calibration.hpp"
#include "edsim/config.hpp"
#include "edsim/experiments.hpp"
#include "edsim/metrics.hpp"
#include "edsim/pipeline.hpp"
#include "edsim/population.hpp"
#include "edsim/tree.hpp"
#include "mmc.hpp"

using namespace edsim;
namespace fs = std::filesystem;

namespace {

int g_jobs = 4;
constexpr std::uint64_t kSeed = 20240601;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) ok = false;
        if (detail.tellp() > 0) detail << "; ";
        detail << what << (cond ? "" : " [FAILED]");
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Distribution means --------------------------------------------------------

void distributions(Check& c) {
    const auto t0 = Clock::now();
    struct Case {
        const char* name;
        DistributionSpec d;
        double mean, tol;
    };
    const std::vector<Case> cases{
        {"Exp(24)", Exponential{24}, 24, 0.2},          {"U(3,10)", Uniform{3, 10}, 6.5, 0.05},
        {"Tri(5,10,15)", Triangular{5, 10, 15}, 10, 0.05}, {"Tri(15,45,90)", Triangular{15, 45, 90}, 50, 0.5},
        {"U(10,45)", Uniform{10, 45}, 27.5, 0.2},       {"U(20,60)", Uniform{20, 60}, 40, 0.2},
        {"U(30,90)", Uniform{30, 90}, 60, 0.3},         {"U(10,60)", Uniform{10, 60}, 35, 0.2},
    };
    std::uint64_t sub = 0;
    for (const auto& k : cases) {
        RandomStream s(kSeed, sub++);
        double sum = 0;
        for (int i = 0; i < 1'000'000; ++i) sum += sample(k.d, s);
        const double m = sum / 1e6;
        c.require(std::abs(m - k.mean) <= k.tol, std::string(k.name) + "=" + fmt("%.4f", m));
    }
    const double sec = seconds_since(t0);
    c.require(sec < 10, "time " + fmt("%.2fs", sec));
}

// Kernel ----------------------------------------------------------------------

enum class K { A };
[[maybe_unused]] std::string to_string(K) { return "A"; }

bool calendar_sort_oracle() {
    EventCalendar<K> cal;
    RandomStream s(kSeed, 77);
    std::vector<std::pair<double, std::uint64_t>> pending;
    int scheduled = 0, popped = 0;
    while (scheduled < 1000 || !cal.empty()) {
        if (scheduled < 1000 && (cal.empty() || s.uniform01() < 0.6)) {
            const double t = cal.now() + std::floor(s.uniform01() * 20.0);
            pending.emplace_back(t, cal.schedule(t, K::A));
            ++scheduled;
        } else {
            const auto ev = cal.pop_next();
            const auto it = std::min_element(pending.begin(), pending.end());
            if (ev->time != it->first || ev->seq != it->second) return false;
            pending.erase(it);
            ++popped;
        }
    }
    return popped == 1000;
}

void kernel(Check& c) {
    const auto t0 = Clock::now();
    const auto m1 = mmc::run(20.0, 10.0, 1, 100000, kSeed);
    c.require(std::abs(m1.utilization - 0.5) <= 0.02, "M/M/1 rho=" + fmt("%.4f", m1.utilization));
    const auto m2 = mmc::run(10.0, 15.0, 2, 100000, kSeed + 1);
    const double little = m2.mean_in_system / (m2.throughput * m2.mean_sojourn);
    c.require(std::abs(little - 1) <= 0.05, "M/M/2 L/(lambda W)=" + fmt("%.4f", little));
    c.require(calendar_sort_oracle(), "1000-event sort oracle");
    const double sec = seconds_since(t0);
    c.require(sec < 30, "time " + fmt("%.2fs", sec));
}

// Calibration -----------------------------------------------------------------

void calibration(Check& c) {
    CalibrationOptions opt;
    opt.jobs = g_jobs;
    const auto found = calibrate_capacities(EDConfig{}, opt);
    c.require(found.capacities.has_value(), "calibration found a vector");
    if (!found.capacities) return;
    EDConfig cfg;
    cfg.capacities = *found.capacities;
    std::ostringstream caps;
    for (std::size_t i = 0; i < Capacities::kCount; ++i) caps << (i ? "/" : "") << cfg.capacities[i];
    const auto r = run_scenario(cfg, {"Baseline", {}, false}, 30, kSeed, g_jobs);
    c.require(cfg.horizon == 30 * 1440.0, "30-day horizon");
    c.require(r.mean_los >= 88.8 && r.mean_los <= 108.5, "capacities " + caps.str() + " LOS=" + fmt("%.2f", r.mean_los));
}

// Scenarios -------------------------------------------------------------------

constexpr int kScenarioReps = 500;

std::vector<ScenarioResult> g_scenarios;  // Baseline, Baseline+ML, A, A+ML, B, B+ML

void ml_effect(Check& c) {
    const auto t0 = Clock::now();
    for (const auto& s : standard_scenarios()) g_scenarios.push_back(run_scenario(EDConfig{}, s, kScenarioReps, kSeed, g_jobs));
    const double sec = seconds_since(t0);
    for (std::size_t i = 0; i < 6; i += 2) {
        const auto& off = g_scenarios[i];
        const auto& on = g_scenarios[i + 1];
        const auto cmp = compare(off, on);
        c.require(on.mean_los < off.mean_los && cmp.los.p < 0.05,
                  on.name + " LOS " + fmt("%+.2f%%", cmp.pct_change_los) + " p=" + fmt("%.2g", cmp.los.p));
        c.require(on.mean_dtdt < off.mean_dtdt && cmp.dtdt.p < 0.05,
                  on.name + " DTDT " + fmt("%+.2f%%", cmp.pct_change_dtdt) + " p=" + fmt("%.2g", cmp.dtdt.p));
    }
    const double red_b = -percent_change(g_scenarios[4].mean_los, g_scenarios[5].mean_los);
    const double red_base = -percent_change(g_scenarios[0].mean_los, g_scenarios[5].mean_los);
    c.require(red_b >= 2 && red_b <= 20,
              "B+ML LOS reduction vs B " + fmt("%.2f%%", red_b) + " (vs Baseline " + fmt("%.2f%%", red_base) + ")");
    c.require(sec < 300, std::to_string(kScenarioReps) + " reps x 6 in " + fmt("%.1fs", sec));
}

void ordering(Check& c) {
    if (g_scenarios.size() != 6) {
        c.require(false, "scenario results unavailable");
        return;
    }
    const auto& base = g_scenarios[0];
    const auto& a = g_scenarios[2];
    const auto& b = g_scenarios[4];
    c.require(b.mean_los <= a.mean_los && a.mean_los <= base.mean_los,
              "LOS B=" + fmt("%.2f", b.mean_los) + " A=" + fmt("%.2f", a.mean_los) + " Base=" + fmt("%.2f", base.mean_los));
    c.require(welch_t(b.los, a.los).p < 0.05, "B vs A p=" + fmt("%.2g", welch_t(b.los, a.los).p));
    c.require(welch_t(a.los, base.los).p < 0.05, "A vs Base p=" + fmt("%.2g", welch_t(a.los, base.los).p));
}

// Classifier ------------------------------------------------------------------

void classifier(Check& c) {
    PopulationSpec spec;
    c.require(spec.label_noise == 0.10, "label noise 0.10");
    RandomStream gen(kSeed, 1);
    const auto data = generate_records(5000, gen, spec);
    RandomStream sp(kSeed, 2);
    const auto split = split_train_test(data, 0.7, sp);
    const auto tree = train_tree(split.train, {kAllFeatures.begin(), kAllFeatures.end()});
    std::size_t correct = 0;
    for (const auto& r : split.test) correct += tree.predict(r) == r.admitted;
    const double acc = static_cast<double>(correct) / static_cast<double>(split.test.size());
    c.require(acc >= 0.85, "recovery accuracy " + fmt("%.3f", acc));

    const auto rules = extract_rules(tree);
    RandomStream probe_stream(kSeed, 3);
    int mismatches = 0;
    for (const auto& r : generate_records(10000, probe_stream, spec)) mismatches += tree.predict(r) != rules.admits(r);
    c.require(mismatches == 0, "rule extraction mismatches " + std::to_string(mismatches));

    const RunConfig cfg;
    const auto out = train_models(generate_dataset(cfg), cfg);
    const auto& dt2 = out.models[1].eval;
    const bool have = dt2.sensitivity && dt2.specificity;
    c.require(have && *dt2.specificity > *dt2.sensitivity,
              "DT2 spec=" + fmt("%.3f", have ? *dt2.specificity : NAN) + " sens=" + fmt("%.3f", have ? *dt2.sensitivity : NAN));
    c.require(dt2.accuracy >= 0.70 && dt2.accuracy <= 0.95, "DT2 acc=" + fmt("%.3f", dt2.accuracy));
}

void metric_formulas(Check& c) {
    using Q = boost::rational<long long>;
    RandomStream s(kSeed, 4);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        ConfusionMatrix cm;
        cm.tp = static_cast<std::uint64_t>(s.uniform01() * 1000) + 1;
        cm.fp = static_cast<std::uint64_t>(s.uniform01() * 1000) + 1;
        cm.tn = static_cast<std::uint64_t>(s.uniform01() * 1000) + 1;
        cm.fn = static_cast<std::uint64_t>(s.uniform01() * 1000) + 1;
        const auto tp = static_cast<long long>(cm.tp), fp = static_cast<long long>(cm.fp),
                   tn = static_cast<long long>(cm.tn), fn = static_cast<long long>(cm.fn);
        const auto e = evaluate(cm);
        worst = std::max({worst, std::abs(e.accuracy - boost::rational_cast<double>(Q(tp + tn, tp + tn + fp + fn))),
                          std::abs(*e.sensitivity - boost::rational_cast<double>(Q(tp, tp + fn))),
                          std::abs(*e.specificity - boost::rational_cast<double>(Q(tn, tn + fp)))});
    }
    c.require(worst <= 1e-12, "100 matrices, max error " + fmt("%.1e", worst));
}

void percent_arithmetic(Check& c) {
    auto r2 = [](double x) { return std::round(x * 100) / 100; };
    const double los = r2(percent_change(98.68, 89.41));
    const double dtdt = r2(percent_change(19.04, 17.48));
    c.require(los == -9.39, "LOS " + fmt("%.2f", los) + " (want -9.39)");
    c.require(dtdt == -8.18, "DTDT " + fmt("%.2f", dtdt) + " (want -8.18)");
}

// Determinism -----------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool cli(const std::string& args) {
    const std::string cmd = std::string(EDSIM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

void determinism(Check& c) {
    const auto root = fs::temp_directory_path() / "edsim_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "sim.json") << R"({"experiment": {"reps": 5}})";
    const std::vector<std::string> files{"records.csv", "tree_dt1.txt", "tree_dt2.txt", "metrics.csv",
                                         "report.txt",  "report.csv",   "replications_b_ml.csv"};
    std::vector<std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
        const auto dir = root / std::to_string(k);
        fs::create_directories(dir);
        const std::string out = " --seed 11 --out " + dir.string();
        const bool ok = cli("datagen" + out) && cli("train --records " + (dir / "records.csv").string() + out) &&
                        cli("simulate --config " + (root / "sim.json").string() + " --jobs " +
                            std::to_string(k == 0 ? 1 : g_jobs) + out);
        c.require(ok, "run " + std::to_string(k + 1) + " exit 0");
        for (const auto& f : files) runs[k].push_back(slurp(dir / f));
    }
    for (std::size_t i = 0; i < files.size(); ++i)
        c.require(!runs[0][i].empty() && runs[0][i] == runs[1][i], files[i] + " identical");
    fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--jobs" && i + 1 < argc) {
            g_jobs = std::max(1, std::atoi(argv[++i]));
        } else {
            std::fprintf(stderr, "usage: acceptance [--jobs N]\n");
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
        {"distribution means", distributions},
        {"kernel correctness", kernel},
        {"baseline calibration", calibration},
        {"ML effect", ml_effect},
        {"scenario ordering", ordering},
        {"classifier recoverability", classifier},
        {"metric formulas", metric_formulas},
        {"percent-change arithmetic", percent_arithmetic},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        failed += !c.ok;
        std::printf("%s %zu %s: %s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, c.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
