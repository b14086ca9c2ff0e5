// Experiment configuration: scenario selection, sizes and seeds, validated
// before anything runs.
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qpq/chang/attacks.hpp"
#include "qpq/chang/protocol.hpp"
#include "qpq/yu/protocol.hpp"

namespace qpq::sim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scenario {
    YuHonest,
    YuBobTwoStep,
    YuAliceInconclusiveChecks,
    ChangHonest,
    ChangBobCounting,
    ChangAliceStoreFake,
    Discriminate,
};

inline const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::YuHonest: return "yu-honest";
        case Scenario::YuBobTwoStep: return "yu-bob-two-step";
        case Scenario::YuAliceInconclusiveChecks: return "yu-alice-inconclusive-checks";
        case Scenario::ChangHonest: return "chang-honest";
        case Scenario::ChangBobCounting: return "chang-bob-counting";
        case Scenario::ChangAliceStoreFake: return "chang-alice-store-fake";
        case Scenario::Discriminate: return "discriminate";
    }
    throw std::logic_error("scenario_name: bad scenario");
}

inline Scenario parse_scenario(const std::string& name) {
    for (Scenario s : {Scenario::YuHonest, Scenario::YuBobTwoStep,
                       Scenario::YuAliceInconclusiveChecks, Scenario::ChangHonest,
                       Scenario::ChangBobCounting, Scenario::ChangAliceStoreFake,
                       Scenario::Discriminate}) {
        if (name == scenario_name(s)) return s;
    }
    throw ConfigError("unknown scenario: " + name);
}

enum class ReportFormat { Json, Csv };

struct ExperimentConfig {
    Scenario scenario = Scenario::Discriminate;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 1;
    yu::YuParams yu;
    chang::ChangParams chang;
    std::optional<std::string> database_file;
    std::string output_path;  // empty -> stdout
    ReportFormat format = ReportFormat::Json;

    bool is_yu() const {
        return scenario == Scenario::YuHonest || scenario == Scenario::YuBobTwoStep ||
               scenario == Scenario::YuAliceInconclusiveChecks;
    }
    bool is_chang() const {
        return scenario == Scenario::ChangHonest || scenario == Scenario::ChangBobCounting ||
               scenario == Scenario::ChangAliceStoreFake;
    }

    void validate() const {
        try {
            if (trials < 1) throw std::invalid_argument("trials must be >= 1");
            if (is_yu()) yu.validate();
            if (is_chang()) {
                chang.validate();
                if (scenario == Scenario::ChangBobCounting &&
                    chang.group_size > chang::kCountingMaxGroup) {
                    throw std::invalid_argument(
                        "counting inference is capped at group size 8");
                }
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid configuration: ") + e.what());
        }
    }

    nlohmann::json echo() const {
        nlohmann::json j;
        j["scenario"] = scenario_name(scenario);
        j["trials"] = trials;
        j["master_seed"] = master_seed;
        if (is_yu()) {
            j["yu"] = {{"raw_length", yu.raw_length},
                       {"substring_count", yu.substring_count},
                       {"database_size", yu.database_size},
                       {"check_fraction", yu.check_fraction},
                       {"max_restarts", yu.max_restarts}};
        }
        if (is_chang()) {
            j["chang"] = {{"eta", chang.eta},
                          {"group_size", chang.group_size},
                          {"group_count", chang.group_count},
                          {"database_size", chang.database_size},
                          {"substring_count", chang.substring_count},
                          {"significance", chang.significance},
                          {"max_restarts", chang.max_restarts}};
        }
        if (database_file) j["database_file"] = *database_file;
        return j;
    }
};

}  // namespace qpq::sim
