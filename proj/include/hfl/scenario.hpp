#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hfl/config.hpp"
#include "hfl/stability.hpp"

namespace hfl {

struct BuiltScenario {
    TorusGeometry geo;
    HiggsBundleSpec spec;
    HiggsField phi;
    MetricField Hhat;             // reference metric of the summands
    MetricField H0;
    std::vector<Field> conformal; // u_a per summand for the conformal kind
};

// lambda_factor > 0 replaces the geometry's convention factor (fault injection in tests).
BuiltScenario build_scenario(const ScenarioConfig& cfg, double lambda_factor = 0.0);

struct IdentityCheck {
    std::string name;
    std::string relation;  // "<=", ">=" or "=="
    double measured = 0.0;
    double tolerance = 0.0;
    bool applicable = true;
    bool pass = true;
};

struct ScenarioResult {
    ScenarioConfig cfg;
    FlowReport flow;
    DerivativeCheck f5;
    std::string classify_kind;  // class name, or "unsupported"/"skipped"
    std::optional<ScenarioClass> cls;
    std::optional<DestabilizerReport> destabilizer;
    std::optional<BogomolovResult> bogomolov;
    std::optional<WeitzenbockField> weitzenbock;
    int weitzenbock_section = -1;
    double heat_oracle_error = -1.0;  // < 0: not applicable
    std::vector<IdentityCheck> identities;
    double wall_seconds = 0.0;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg, double lambda_factor = 0.0);

// Identity suite against the default tolerances times `scale`.
std::vector<IdentityCheck> identity_checks(const ScenarioResult& res, double scale = 1.0);
bool all_pass(const std::vector<IdentityCheck>& checks);

// report.json content: deterministic, no timing.
std::string report_json(const ScenarioResult& res);
// report.json, monitor.csv, timing.json and (when present) destabilizer.json under dir.
void write_outputs(const ScenarioResult& res, const std::string& dir);
std::string identity_table(const std::vector<IdentityCheck>& checks);

struct SweepRow {
    double value = 0.0;
    ScenarioResult result;
};

// parameter: dt_initial (scales dt_initial, dt_max and safety together), N, or amplitude (Higgs).
ScenarioConfig sweep_variant(const ScenarioConfig& base, const std::string& parameter, double value);
std::string sweep_csv(const std::string& parameter, const std::vector<SweepRow>& rows);

}  // namespace hfl
