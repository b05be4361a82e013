// edsim: synthetic admission data, admission classifiers and the ED detour simulation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edsim/calibration.hpp"
#include "edsim/config.hpp"
#include "edsim/pipeline.hpp"

namespace fs = std::filesystem;
using namespace edsim;

namespace {

struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<int> jobs;
    std::vector<std::string> scenarios;
    std::optional<std::string> out;
    std::string records;
};

RunConfig load(const Flags& f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) throw ConfigError("cannot open config file " + f.config);
        cfg = parse_config(in);
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.reps) cfg.experiment.reps = *f.reps;
    if (f.jobs) cfg.experiment.jobs = *f.jobs;
    if (!f.scenarios.empty()) cfg.experiment.scenarios = f.scenarios;
    if (f.out) cfg.out = *f.out;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw RuntimeFailure("cannot create output directory " + cfg.out + ": " + ec.message());
    return cfg.out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out.flush()) throw RuntimeFailure("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RuntimeFailure("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void log(const std::string& msg) { std::cerr << "edsim: " << msg << '\n'; }

void cmd_datagen(const RunConfig& cfg) {
    const auto records = generate_dataset(cfg);
    std::ostringstream csv;
    write_records_csv(csv, records);
    const auto path = out_dir(cfg) / "records.csv";
    write_file(path, csv.str());
    std::size_t admitted = 0;
    for (const auto& r : records) admitted += r.admitted;
    log("wrote " + std::to_string(records.size()) + " records (" + std::to_string(admitted) + " admitted) to " +
        path.string());
}

void cmd_train(const RunConfig& cfg, const std::string& records_path) {
    const auto dir = out_dir(cfg);
    std::vector<PatientRecord> records;
    if (records_path.empty()) {
        records = generate_dataset(cfg);
        std::ostringstream csv;
        write_records_csv(csv, records);
        write_file(dir / "records.csv", csv.str());
    } else {
        std::ifstream in(records_path);
        if (!in) throw RuntimeFailure("cannot open records file " + records_path);
        records = read_records_csv(in);
    }
    const auto t = train_models(records, cfg);
    if (t.warning) log(*t.warning);
    write_file(dir / "tree_dt1.txt", to_string(t.dt1));
    write_file(dir / "tree_dt2.txt", to_string(t.dt2) + "\nextracted rules:\n" + to_string(extract_rules(t.dt2)));
    write_file(dir / "metrics.csv", metrics_csv(t));
    std::cout << metrics_table(t);
}

void write_outputs(const fs::path& dir, const std::vector<std::pair<ScenarioSpec, ScenarioResult>>& runs) {
    const auto report = render_report(build_report_rows(runs));
    write_file(dir / "report.txt", report.text);
    write_file(dir / "report.csv", report.csv);
    std::cout << report.text;
}

void cmd_simulate(const RunConfig& cfg) {
    const auto dir = out_dir(cfg);
    const auto runs = run_experiment(cfg);
    for (const auto& [spec, result] : runs) {
        std::ostringstream csv;
        write_replications_csv(csv, result);
        write_file(dir / ("replications_" + scenario_slug(spec.name) + ".csv"), csv.str());
    }
    write_outputs(dir, runs);
}

void cmd_report(const RunConfig& cfg) {
    const fs::path dir = cfg.out;
    std::vector<std::pair<ScenarioSpec, ScenarioResult>> runs;
    for (const auto& spec : resolve_scenarios(cfg.experiment.scenarios)) {
        const auto path = dir / ("replications_" + scenario_slug(spec.name) + ".csv");
        if (!fs::exists(path)) {
            if (spec.name == "Baseline") throw RuntimeFailure("missing " + path.string());
            continue;
        }
        std::istringstream in(read_file(path));
        runs.emplace_back(spec, read_replications_csv(in, spec.name));
    }
    write_outputs(dir, runs);
}

void cmd_calibrate(const RunConfig& cfg) {
    const auto dir = out_dir(cfg);
    CalibrationOptions opt = cfg.calibration;
    opt.jobs = cfg.experiment.jobs;
    std::ostringstream log_csv;
    log_csv << "registration_clerks,triage_nurses,doctors,nurses,orderlies,lab_techs,radiology_units,mean_los,in_band\n";
    const auto result = calibrate_capacities(cfg.ed, opt, [&](const CalibrationCandidate& c) {
        for (std::size_t i = 0; i < Capacities::kCount; ++i) log_csv << c.capacities[i] << ',';
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g,%d\n", c.mean_los, c.in_band ? 1 : 0);
        log_csv << buf;
    });
    write_file(dir / "calibration.csv", log_csv.str());
    if (!result.capacities) throw RuntimeFailure("calibration found no capacity vector inside the band");
    nlohmann::json fragment;
    for (std::size_t i = 0; i < Capacities::kCount; ++i)
        fragment["ed"]["capacities"][std::string(Capacities::kNames[i])] = (*result.capacities)[i];
    write_file(dir / "calibrated.json", fragment.dump(2) + "\n");
    char buf[128];
    std::snprintf(buf, sizeof buf, "baseline mean LOS %.2f min with %d units (%zu vectors evaluated)\n",
                  result.mean_los, result.total_staff, result.evaluated.size());
    std::cout << fragment.dump(2) << '\n' << buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ED patient-flow simulation with an embedded admission classifier"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON configuration file (see config-reference)");
    app.add_option("--seed", f.seed, "master seed (overrides config)");
    app.add_option("--reps", f.reps, "replications per scenario (overrides config)");
    app.add_option("--scenarios", f.scenarios, "comma-separated scenarios, e.g. baseline,b+ml")->delimiter(',');
    app.add_option("--out", f.out, "output directory (overrides config)");
    app.add_option("--jobs", f.jobs, "worker threads (overrides config)");

    auto* datagen = app.add_subcommand("datagen", "write synthetic patient records to records.csv");
    auto* train = app.add_subcommand("train", "train DT1, DT2 and kNN; write trees and metrics");
    train->add_option("--records", f.records, "records CSV (default: generate from config)");
    auto* simulate = app.add_subcommand("simulate", "run the scenarios and write the report");
    auto* calibrate = app.add_subcommand("calibrate", "grid-search capacities to the target baseline LOS");
    auto* report = app.add_subcommand("report", "rebuild the report from replication CSVs in --out");
    auto* reference = app.add_subcommand("config-reference", "print every configuration key and its default");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (reference->parsed()) {
            std::cout << config_reference();
            return 0;
        }
        const RunConfig cfg = load(f);
        if (datagen->parsed()) cmd_datagen(cfg);
        if (train->parsed()) cmd_train(cfg, f.records);
        if (simulate->parsed()) cmd_simulate(cfg);
        if (calibrate->parsed()) cmd_calibrate(cfg);
        if (report->parsed()) cmd_report(cfg);
    } catch (const ConfigError& e) {
        log(std::string("config error: ") + e.what());
        return 1;
    } catch (const std::exception& e) {
        log(std::string("error: ") + e.what());
        return 2;
    }
    return 0;
}
