// Machine-readable experiment reports: JSON (schema below) and CSV, plus the
// cross-report comparison table.
//
// JSON schema: top-level object with "config", "metrics" (name -> {mean,
// stderr, n}), "verdicts" (name -> bool), "seed", "duration_ms".
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace qpq::sim {

struct MetricSummary {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::uint64_t n = 0;
};

struct ExperimentReport {
    std::string scenario;
    nlohmann::json config;  // echo of the experiment configuration
    std::map<std::string, MetricSummary> metrics;
    std::map<std::string, bool> verdicts;
    std::uint64_t seed = 0;
    std::int64_t duration_ms = 0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["config"] = config;
        nlohmann::json m(nlohmann::json::value_t::object);
        for (const auto& [name, s] : metrics) {
            m[name] = {{"mean", s.mean}, {"stderr", s.stderr_of_mean}, {"n", s.n}};
        }
        j["metrics"] = m;
        nlohmann::json v(nlohmann::json::value_t::object);
        for (const auto& [name, b] : verdicts) v[name] = b;
        j["verdicts"] = v;
        j["seed"] = seed;
        j["duration_ms"] = duration_ms;
        return j;
    }

    std::string to_json_string() const { return to_json().dump(2) + "\n"; }

    // One row per metric; verdicts follow as 0/1 rows.
    std::string to_csv() const {
        std::string out = "name,mean,stderr,n\n";
        for (const auto& [name, s] : metrics) {
            out += name + ',' + format_double(s.mean) + ',' + format_double(s.stderr_of_mean) +
                   ',' + std::to_string(s.n) + '\n';
        }
        for (const auto& [name, b] : verdicts) {
            out += "verdict." + name + ',' + (b ? "1" : "0") + ",0,1\n";
        }
        return out;
    }

    static std::string format_double(double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    }
};

inline ExperimentReport report_from_json(const nlohmann::json& j) {
    ExperimentReport r;
    r.config = j.at("config");
    r.scenario = r.config.value("scenario", std::string{});
    for (const auto& [name, m] : j.at("metrics").items()) {
        r.metrics[name] = {m.at("mean").get<double>(), m.at("stderr").get<double>(),
                           m.at("n").get<std::uint64_t>()};
    }
    for (const auto& [name, v] : j.at("verdicts").items()) r.verdicts[name] = v.get<bool>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.duration_ms = j.value("duration_ms", std::int64_t{0});
    return r;
}

// Aligned comparison table for a parameter sweep of one scenario: config
// fields become columns, metric means become columns, one row per report.
inline std::string summarize_csv(const std::vector<ExperimentReport>& reports) {
    for (const auto& r : reports) {
        if (r.scenario != reports.front().scenario) {
            throw std::invalid_argument("summarize: reports mix different scenarios");
        }
    }

    std::map<std::string, bool> config_cols;  // flattened "section.key" names
    std::map<std::string, bool> metric_cols;
    auto flatten = [](const nlohmann::json& cfg, auto&& emit) {
        for (const auto& [key, value] : cfg.items()) {
            if (value.is_object()) {
                for (const auto& [k2, v2] : value.items()) emit(key + "." + k2, v2);
            } else if (key != "scenario") {
                emit(key, value);
            }
        }
    };
    for (const auto& r : reports) {
        flatten(r.config, [&](const std::string& k, const nlohmann::json&) { config_cols[k]; });
        for (const auto& [name, m] : r.metrics) { (void)m; metric_cols[name]; }
    }

    std::string out = "scenario";
    for (const auto& [k, _] : config_cols) out += ',' + k;
    for (const auto& [k, _] : metric_cols) out += ',' + k;
    out += '\n';

    for (const auto& r : reports) {
        std::map<std::string, std::string> row;
        flatten(r.config, [&](const std::string& k, const nlohmann::json& v) {
            row[k] = v.is_string() ? v.get<std::string>() : v.dump();
        });
        out += r.scenario;
        for (const auto& [k, _] : config_cols) {
            out += ',';
            if (auto it = row.find(k); it != row.end()) out += it->second;
        }
        for (const auto& [k, _] : metric_cols) {
            out += ',';
            if (auto it = r.metrics.find(k); it != r.metrics.end()) {
                out += ExperimentReport::format_double(it->second.mean);
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace qpq::sim
