#pragma once

#include <optional>
#include <string>

#include "hfl/functionals.hpp"

namespace hfl {

struct FlowConfig {
    double dt_initial = 1e-3;
    double dt_max = 1e-2;
    double safety = 0.05;
    double t_end = 1.0;
    double target = 1e-8;          // converged when sup|Φ| drops below
    double degeneracy_cap = kDegeneracyCap;
    int cadence = 1;               // monitor every `cadence` accepted steps
    std::string scheme = "etd2";   // etd2 | etd1 | exp_euler
    long max_steps = 1000000;
    double plateau_tol = 1e-3;
    double plateau_t_min = 0.5;
    std::vector<double> checkpoints;  // stepped to exactly; metric snapshots kept
    bool donaldson = true;

    void validate() const;
};

struct FlowState {
    double t = 0.0;
    MetricField H;
    MetricField Hhat;
    HiggsField phi;
    HiggsBundleSpec spec;
    const TorusGeometry* geo = nullptr;
    std::optional<ResidualField> cached;
    double dt = 0.0;
    std::vector<double> hhat_logdet;  // log det Ĥ per point
    double logdet_residual = 0.0;     // |∫ log det(Ĥ^{-1}H)| after the last step
    double etd_h = -1.0;              // step size the multipliers below were built for
    std::vector<double> etd[3];

    FlowState(const HiggsBundleSpec& s, const HiggsField& p, const MetricField& H0, const TorusGeometry& g);
    const ResidualField& residual(double cap = kDegeneracyCap);
};

struct MonitorSample {
    double t = 0.0;
    double sup_phi = 0.0;
    double l1_phi = 0.0;
    double l2_phi_sq = 0.0;
    double donaldson = 0.0;
    double sup_higgs_norm = 0.0;
    double logdet_residual = 0.0;
    double min_eig_H = 0.0;
    double cond_H = 0.0;
};

enum class Outcome { converged, plateau, degenerating, budget_exhausted };
const char* to_string(Outcome o);

struct FlowReport {
    Outcome outcome = Outcome::budget_exhausted;
    std::string reason;
    std::vector<MonitorSample> samples;
    long steps = 0;
    double t_final = 0.0;
    MetricField H_final;
    MatField Phi_final;
    std::vector<std::pair<double, MetricField>> snapshots;

    // identity monitors, evaluated at every monitor sample
    double trace_heat_defect = 0.0;       // sup |tr Φ(t) − e^{tΔ} tr Φ(0)|
    double heat_domination_margin = 0.0;  // min over t of sup e^{tΔ}|Φ(0)| − sup |Φ(t)|
    int sup_violations = 0;
    int l1_violations = 0;
    int higgs_norm_violations = 0;        // sup|φ|_{H(t)} exceeding its earlier value × (1 + 1e-6)
    double max_logdet_residual = 0.0;     // after normalization, over every step
};

double adapt_dt(const FlowState& state, const FlowConfig& cfg);

// H ← H exp(−2 dt Φ), then determinant normalization.
void step(FlowState& state, double dt, const FlowConfig& cfg = FlowConfig());

// One step of the configured scheme (exponential Euler, or the heat-filtered ETD1/ETD2 variants).
void advance(FlowState& state, double dt, const FlowConfig& cfg);

FlowReport run(const HiggsBundleSpec& spec, const HiggsField& phi, const MetricField& H0,
               const TorusGeometry& geo, const FlowConfig& cfg);

// Projects H back onto ∫ log det(Ĥ^{-1}H) = 0; returns the residual afterwards.
double normalize_det(MetricField& H, const MetricField& Hhat, const TorusGeometry& geo);

void write_monitor_csv(const std::vector<MonitorSample>& samples, const std::string& path);
std::string monitor_csv(const std::vector<MonitorSample>& samples);

}  // namespace hfl
