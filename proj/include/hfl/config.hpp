#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hfl/flow.hpp"

namespace hfl {

constexpr int kSchemaVersion = 1;

struct GeometryBlock {
    int n = 1;
    int N = 32;
    std::vector<double> periods;             // 2n entries; empty means unit lengths
    std::vector<std::vector<double>> g;      // real part, n×n; empty means identity
    std::vector<std::vector<double>> g_imag; // imaginary part, n×n or empty
};

struct BundleBlock {
    int rank = 1;
    std::vector<int> fluxes{0};
};

struct HiggsEntryConfig {
    int component = 0;
    int row = 0;
    int col = 0;
    double re = 0.0;
    double im = 0.0;
    int theta_index = -1;
};

// recipe: "zero", "nilpotent" (amplitude · E₁₂ dz¹) or "entries" (each value times amplitude)
struct HiggsBlock {
    std::string recipe = "zero";
    double amplitude = 1.0;
    std::vector<HiggsEntryConfig> entries;
};

// kind: "reference", "conformal" (each diagonal entry times exp(2u_a), u_a random real on the
// wavevectors 0 < |m| ≤ band) or "explicit" (constant diagonal factors times the reference)
struct InitialMetricBlock {
    std::string kind = "reference";
    double amplitude = 0.1;
    int band = 1;
    std::vector<double> diag;
};

struct AnalysisBlock {
    bool classify = true;
    bool destabilizer = false;
    bool bogomolov = false;
    bool weitzenbock = true;
    bool heat_oracle = false;  // rank 1 with φ = 0 only
};

struct ScenarioConfig {
    int schema_version = kSchemaVersion;
    std::string name = "scenario";
    std::uint64_t seed = 1;
    GeometryBlock geometry;
    BundleBlock bundle;
    HiggsBlock higgs;
    InitialMetricBlock initial_metric;
    FlowConfig flow;
    AnalysisBlock analysis;
    std::string output_dir = "out";
};

// Parses and validates; throws a config error listing every problem found.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
// Canonical form: fixed key order, two-space indent, trailing newline.
std::string serialize_config(const ScenarioConfig& cfg);
// Every violated field, empty when valid.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

}  // namespace hfl
