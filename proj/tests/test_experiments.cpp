#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "edsim/experiments.hpp"

using namespace edsim;

namespace {

// Two-sided Student-t tail by Simpson integration of the density; no library calls.
double t_tail_quadrature(double t, double df) {
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * M_PI);
    auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const double a = 0, b = std::abs(t);
    const int n = 20000;
    const double h = (b - a) / n;
    double s = pdf(a) + pdf(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(a + i * h);
    return 1 - 2 * s * h / 3;
}

EDConfig quick_config() {
    EDConfig c;
    c.horizon = 6 * 1440.0;
    return c;
}

ScenarioResult fake_result(const std::string& name, std::vector<double> los, std::vector<double> dtdt) {
    std::vector<ReplicationStats> reps;
    for (std::size_t i = 0; i < los.size(); ++i) {
        ReplicationStats s;
        s.mean_los = los[i];
        s.mean_dtdt = dtdt[i];
        reps.push_back(s);
    }
    return summarize(name, reps);
}

}  // namespace

TEST(Welch, HandComputedExample) {
    const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
    const auto r = welch_t(a, b);
    EXPECT_NEAR(r.t, -1.224744871, 1e-9);
    EXPECT_NEAR(r.df, 4.0, 1e-12);
    EXPECT_NEAR(r.p, t_tail_quadrature(r.t, r.df), 1e-6);
}

TEST(Welch, PValueMatchesQuadratureAcrossRange) {
    for (double df : {1.0, 2.5, 7.3, 30.0, 58.0})
        for (double t : {0.1, 0.8, 1.96, 3.5}) EXPECT_NEAR(t_two_sided_p(t, df), t_tail_quadrature(t, df), 1e-6);
}

TEST(Welch, IdenticalVectors) {
    const std::vector<double> a{1, 4, 2, 8};
    const auto r = welch_t(a, a);
    EXPECT_EQ(r.t, 0);
    EXPECT_EQ(r.p, 1);
}

TEST(Welch, DegenerateVariance) {
    const std::vector<double> a{2, 2, 2}, b{2, 2}, c{3, 3, 3};
    EXPECT_EQ(welch_t(a, b).t, 0);
    EXPECT_EQ(welch_t(a, b).p, 1);
    EXPECT_TRUE(std::isinf(welch_t(a, c).t));
    EXPECT_LT(welch_t(a, c).t, 0);
    EXPECT_EQ(welch_t(a, c).p, 0);
    EXPECT_THROW(welch_t(std::vector<double>{1}, a), std::invalid_argument);
}

TEST(Welch, SwapAndLocationScale) {
    RandomStream s(3, 0);
    std::vector<double> a, b;
    for (int i = 0; i < 12; ++i) a.push_back(s.uniform01() * 10);
    for (int i = 0; i < 17; ++i) b.push_back(s.uniform01() * 13 + 1);
    const auto r = welch_t(a, b), q = welch_t(b, a);
    EXPECT_DOUBLE_EQ(r.t, -q.t);
    EXPECT_DOUBLE_EQ(r.p, q.p);
    auto shifted_a = a, shifted_b = b, scaled_a = a, scaled_b = b;
    for (auto& x : shifted_a) x += 100;
    for (auto& x : shifted_b) x += 100;
    for (auto& x : scaled_a) x *= 3.5;
    for (auto& x : scaled_b) x *= 3.5;
    EXPECT_NEAR(welch_t(shifted_a, shifted_b).t, r.t, 1e-9);
    EXPECT_NEAR(welch_t(scaled_a, scaled_b).t, r.t, 1e-9);
}

TEST(Welch, SizeUnderNull) {
    RandomStream s(99, 0);
    int rejections = 0;
    const int trials = 1000;
    for (int k = 0; k < trials; ++k) {
        std::vector<double> a(30), b(30);
        for (auto& x : a) x = normal_quantile(s.uniform01());
        for (auto& x : b) x = normal_quantile(s.uniform01());
        rejections += welch_t(a, b).p < 0.05;
    }
    EXPECT_NEAR(rejections / double(trials), 0.05, 0.02);
}

TEST(Compare, PublishedLosPercentChange) {
    EXPECT_EQ(std::round(percent_change(98.68, 89.41) * 100) / 100, -9.39);
}

TEST(Compare, PublishedDtdtPercentChangeNeedsUnroundedMeans) {
    // 17.48 vs 19.04 is -8.193%, so the published -8.18 must come from the unrounded means.
    EXPECT_EQ(std::round(percent_change(19.04, 17.48) * 100) / 100, -8.19);
    double lo = 0, hi = -100;
    for (double b : {19.035, 19.045})
        for (double v : {17.475, 17.485}) {
            lo = std::min(lo, percent_change(b, v));
            hi = std::max(hi, percent_change(b, v));
        }
    EXPECT_LE(lo, -8.18);
    EXPECT_GE(hi, -8.18);
}

TEST(Compare, IdentityIsZeroAndInsignificant) {
    const auto x = fake_result("x", {100, 102, 98}, {20, 21, 19});
    const auto c = compare(x, x);
    EXPECT_EQ(c.pct_change_los, 0);
    EXPECT_EQ(c.los.p, 1);
    EXPECT_FALSE(c.significant_at_05);
    const auto y = fake_result("y", {100, 102}, {20, 21});
    EXPECT_THROW(compare(x, y), std::invalid_argument);
}

TEST(Compare, DirectionIsVariantMinusBaseline) {
    const auto base = fake_result("b", {100, 101, 99, 100}, {20, 21, 19, 20});
    const auto better = fake_result("v", {90, 91, 89, 90}, {18, 19, 17, 18});
    const auto c = compare(base, better);
    EXPECT_LT(c.los.t, 0);
    EXPECT_NEAR(c.pct_change_los, -10, 1e-12);
    EXPECT_TRUE(c.significant_los);
}

TEST(Scenarios, StandardSetAndLookup) {
    const auto s = standard_scenarios();
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s[5].name, "B+ML");
    EXPECT_EQ(s[5].capacity_deltas.at("orderlies"), 1);
    EXPECT_EQ(find_standard_scenario("b+ml")->name, "B+ML");
    EXPECT_FALSE(find_standard_scenario("C"));
    EXPECT_THROW(apply_scenario(EDConfig{}, {"bad", {{"janitors", 1}}, false}), std::invalid_argument);
    EXPECT_THROW(apply_scenario(EDConfig{}, {"neg", {{"nurses", -50}}, false}), std::invalid_argument);
}

TEST(Scenarios, DeterministicAndThreadIndependent) {
    const auto c = quick_config();
    const auto a = run_scenario(c, standard_scenarios()[1], 4, 7, 1);
    const auto b = run_scenario(c, standard_scenarios()[1], 4, 7, 4);
    EXPECT_EQ(a.los, b.los);
    EXPECT_EQ(a.dtdt, b.dtdt);
    EXPECT_THROW(run_scenario(c, standard_scenarios()[0], 1, 7), std::invalid_argument);
}

TEST(Scenarios, IdentitySpecEqualsBaseline) {
    const auto c = quick_config();
    const auto base = run_scenario(c, standard_scenarios()[0], 3, 5);
    const auto same = run_scenario(c, {"Same", {{"nurses", 0}}, false}, 3, 5);
    EXPECT_EQ(base.los, same.los);
    EXPECT_EQ(base.dtdt, same.dtdt);
}

TEST(Scenarios, ConfidenceIntervalBracketsMean) {
    const auto r = fake_result("x", {1, 2, 3, 4, 5}, {1, 1, 1, 1, 2});
    EXPECT_LT(r.ci_los.low, 3);
    EXPECT_GT(r.ci_los.high, 3);
    // t(0.975, 4) = 2.776445
    EXPECT_NEAR(r.ci_los.high - 3, 2.776445 * std::sqrt(2.5 / 5), 1e-5);
}

TEST(Report, SixRowsWithCsvMirror) {
    std::vector<std::pair<ScenarioSpec, ScenarioResult>> runs;
    double shift = 0;
    for (const auto& s : standard_scenarios()) {
        runs.emplace_back(s, fake_result(s.name, {100 - shift, 101 - shift, 99 - shift}, {20, 21, 19 - shift / 10}));
        shift += 1;
    }
    const auto rep = render_report(build_report_rows(runs));
    std::istringstream csv(rep.csv);
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, kReportCsvHeader);
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("Baseline,", 0), 0u);
    EXPECT_NE(line.find(",,,"), std::string::npos);
    int rows = 1;
    while (std::getline(csv, line)) ++rows;
    EXPECT_EQ(rows, 6);
    int table_rows = 0;
    for (const auto& s : standard_scenarios())
        if (rep.text.find("\n" + s.name + " ") != std::string::npos) ++table_rows;
    EXPECT_EQ(table_rows, 6);
    EXPECT_NE(rep.text.find('*'), std::string::npos);
}

TEST(Report, BaselineOnlyAndMissingBaseline) {
    const auto base = fake_result("Baseline", {100, 101}, {20, 21});
    const auto rep = render_report(build_report_rows({{standard_scenarios()[0], base}}));
    std::istringstream csv(rep.csv);
    std::string line;
    int n = 0;
    while (std::getline(csv, line)) ++n;
    EXPECT_EQ(n, 2);
    EXPECT_THROW(build_report_rows({{standard_scenarios()[2], base}}), std::invalid_argument);
}

TEST(Report, ReplicationCsvRoundTrip) {
    const auto r = run_scenario(quick_config(), standard_scenarios()[0], 3, 5);
    std::stringstream ss;
    write_replications_csv(ss, r);
    const auto back = read_replications_csv(ss, "Baseline");
    EXPECT_EQ(back.los, r.los);
    EXPECT_EQ(back.dtdt, r.dtdt);
    EXPECT_EQ(back.replications[2].patient_count, r.replications[2].patient_count);
}
