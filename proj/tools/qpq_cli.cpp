// Command-line front end: one subcommand per scenario plus `summarize`.
// Exit codes: 0 success, 2 configuration rejected, 3 runtime failure.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qpq/sim/config.hpp"
#include "qpq/sim/report.hpp"
#include "qpq/sim/runner.hpp"

namespace {

struct CliOptions {
    qpq::sim::ExperimentConfig config;
    std::string format = "json";
};

void add_common_flags(CLI::App* cmd, CliOptions& opts) {
    auto& cfg = opts.config;
    cmd->add_option("--trials", cfg.trials, "Number of independent trials");
    cmd->add_option("--seed", cfg.master_seed, "Master seed for the random streams");
    cmd->add_option("--output", cfg.output_path, "Report file path (default: stdout)");
    cmd->add_option("--format", opts.format, "Report format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

void add_yu_flags(CLI::App* cmd, CliOptions& opts) {
    auto& yu = opts.config.yu;
    auto* raw = cmd->add_option("--raw-length", yu.raw_length,
                                "Oblivious-key rounds before checking (k * N)");
    auto* k = cmd->add_option("--substrings", yu.substring_count, "Substring count k");
    auto* n = cmd->add_option("--db-size", yu.database_size, "Database size N");
    cmd->add_option("--check-fraction", yu.check_fraction,
                    "Checked fraction of the raw key, in [0, 1)");
    // Any two of (raw-length, substrings, db-size) determine the third.
    cmd->callback([raw, k, n, &yu] {
        if (!raw->empty() && n->empty()) {
            yu.database_size = yu.raw_length / std::max<std::size_t>(1, yu.substring_count);
        } else if (raw->empty()) {
            yu.raw_length = yu.substring_count * yu.database_size;
        }
        (void)k;
    });
}

void add_chang_flags(CLI::App* cmd, CliOptions& opts) {
    auto& ch = opts.config.chang;
    cmd->add_option("--eta", ch.eta, "Z-basis measurement probability");
    cmd->add_option("--group-size", ch.group_size, "Particles per group (n >= 4)");
    auto* raw = cmd->add_option("--raw-length", ch.group_count,
                                "Total transmitted qubits (rounded up to whole groups)");
    cmd->add_option("--substrings", ch.substring_count, "Substring count k");
    cmd->add_option("--db-size", ch.database_size, "Database size cap N");
    cmd->add_option("--significance", ch.significance,
                    "Significance level of the statistical checks");
    cmd->callback([raw, &ch] {
        if (!raw->empty()) {
            // entered as qubit count; convert to groups
            ch.group_count = (ch.group_count + ch.group_size - 1) / ch.group_size;
        }
    });
}

int write_report(const qpq::sim::ExperimentReport& report, const CliOptions& opts) {
    const std::string body =
        opts.format == "csv" ? report.to_csv() : report.to_json_string();
    if (opts.config.output_path.empty()) {
        std::cout << body;
        return 0;
    }
    std::ofstream out(opts.config.output_path, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write " << opts.config.output_path << "\n";
        return 3;
    }
    out << body;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and cryptanalysis harness for two practical "
                 "quantum-private-query protocols"};
    app.require_subcommand(1);

    CliOptions opts;
    std::vector<std::string> summarize_inputs;
    std::string summarize_output;

    const std::vector<std::pair<qpq::sim::Scenario, const char*>> scenarios = {
        {qpq::sim::Scenario::YuHonest, "Honest run of the honesty-checked protocol"},
        {qpq::sim::Scenario::YuBobTwoStep,
         "Database holder's two-step measurement attack"},
        {qpq::sim::Scenario::YuAliceInconclusiveChecks,
         "User audits only inconclusive positions"},
        {qpq::sim::Scenario::ChangHonest, "Honest run of the reordering protocol"},
        {qpq::sim::Scenario::ChangBobCounting,
         "Holder's multiset counting inference on announced groups"},
        {qpq::sim::Scenario::ChangAliceStoreFake,
         "User stores the carriers and returns a fabricated group"},
        {qpq::sim::Scenario::Discriminate,
         "Analytic minimum-error discrimination of the attack states"},
    };

    std::map<CLI::App*, qpq::sim::Scenario> dispatch;
    for (const auto& [scenario, description] : scenarios) {
        CLI::App* cmd = app.add_subcommand(qpq::sim::scenario_name(scenario), description);
        add_common_flags(cmd, opts);
        const bool yu = scenario == qpq::sim::Scenario::YuHonest ||
                        scenario == qpq::sim::Scenario::YuBobTwoStep ||
                        scenario == qpq::sim::Scenario::YuAliceInconclusiveChecks;
        const bool chang = scenario == qpq::sim::Scenario::ChangHonest ||
                           scenario == qpq::sim::Scenario::ChangBobCounting ||
                           scenario == qpq::sim::Scenario::ChangAliceStoreFake;
        if (yu) {
            add_yu_flags(cmd, opts);
            cmd->add_option_function<std::string>(
                "--database-file",
                [&opts](const std::string& path) { opts.config.database_file = path; },
                "Read database bits from a file instead of the seed");
        }
        if (chang) add_chang_flags(cmd, opts);
        dispatch[cmd] = scenario;
    }

    CLI::App* summarize = app.add_subcommand(
        "summarize", "Combine JSON reports of one scenario into a CSV table");
    summarize->add_option("reports", summarize_inputs, "JSON report files")->required();
    summarize->add_option("--output", summarize_output, "CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (summarize->parsed()) {
            std::vector<qpq::sim::ExperimentReport> reports;
            for (const auto& path : summarize_inputs) {
                std::ifstream in(path);
                if (!in) throw std::runtime_error("cannot read " + path);
                nlohmann::json j;
                in >> j;
                reports.push_back(qpq::sim::report_from_json(j));
            }
            const std::string table = qpq::sim::summarize_csv(reports);
            if (summarize_output.empty()) {
                std::cout << table;
            } else {
                std::ofstream out(summarize_output, std::ios::binary);
                if (!out) throw std::runtime_error("cannot write " + summarize_output);
                out << table;
            }
            return 0;
        }

        for (const auto& [cmd, scenario] : dispatch) {
            if (!cmd->parsed()) continue;
            opts.config.scenario = scenario;
            opts.config.format = opts.format == "csv" ? qpq::sim::ReportFormat::Csv
                                                      : qpq::sim::ReportFormat::Json;
            opts.config.validate();
            const auto report = qpq::sim::run_scenario(opts.config);
            return write_report(report, opts);
        }
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const qpq::sim::ConfigError& e) {
        std::cerr << "configuration rejected: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration rejected: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
