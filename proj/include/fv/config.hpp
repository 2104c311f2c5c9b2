#pragma once

// Experiment configuration: JSON schema validation with pointer-style error
// paths, materialization of gate/state presets into concrete matrices, and the
// deterministic report builder behind the command-line tool.

#include "fv/protocols.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace fv {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind { Sorkin, Theorem2, Adversary, Factorisation, Spacelike, Campaign };

std::string experiment_name(ExperimentKind kind);

struct ExperimentConfig {
    int version = 1;
    ExperimentKind kind = ExperimentKind::Sorkin;
    std::uint64_t seed = 0;
    double tolerance = 1e-9;
    int trials = 1;
    nlohmann::json raw;  // the validated document
    std::string digest;  // fnv1a over the canonical dump
};

// throws ConfigError (unreadable/unparseable), SchemaError (shape, with a
// JSON-pointer path) or PhysicsValidationError (bad matrix) on invalid input
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct RunResult {
    nlohmann::json report;
    std::string csv;  // per-trial summary, campaign mode only
    int exit_code = 0;  // 0 pass, 1 physics failure
};

RunResult run_experiment(const ExperimentConfig& config);

std::string fnv1a_hex(const std::string& data);

// deterministic serialization used for reports and golden files
std::string dump_report(const nlohmann::json& report);

} // namespace fv
