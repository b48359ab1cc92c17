#pragma once

#include <optional>
#include <string>

#include <boost/rational.hpp>

#include "hfl/functionals.hpp"

namespace hfl {

using Rational = boost::rational<long long>;

enum class Stability { stable, polystable, strictly_semistable, unstable };
const char* to_string(Stability s);

struct Witness {
    std::vector<int> summands;  // coordinate subspace, ascending
    int rank = 0;
    long long degree = 0;
    Rational slope;
};

struct ScenarioClass {
    Stability kind = Stability::stable;
    Rational slope;                  // μ(E)
    std::optional<Witness> witness;  // absent only when stable
};

// Exact classification over φ-invariant coordinate subspaces. Supported specs: each φ component
// is either diagonal or has acyclic off-diagonal support, and every entry respects the fluxes.
ScenarioClass classify(const HiggsBundleSpec& spec);

// ν = Σ_{α<l} (λ_{α+1} − λ_α) rank(E_α)(μ(E) − μ(E_α)) for the filtration E_1 ⊂ … ⊂ E_{l−1} ⊂ E.
// ranks/degrees describe E_1 … E_{l−1}. Throws a filtration error unless λ_l rank(E) equals
// Σ (λ_{α+1} − λ_α) rank(E_α); the degree form λ_l deg(E) − Σ (λ_{α+1} − λ_α) deg(E_α) is
// evaluated too and must agree exactly.
Rational nu_invariant(const std::vector<Rational>& lambdas, const std::vector<int>& ranks,
                      const std::vector<long long>& degrees, const HiggsBundleSpec& spec);

struct NuValue {
    double nu = 0.0;           // slope-weighted form
    double nu_deg_form = 0.0;  // λ_l deg(E) − Σ (λ_{α+1} − λ_α) deg(E_α)
    double rank_identity = 0.0;
};
NuValue nu_value(const std::vector<double>& lambdas, const std::vector<int>& ranks,
                 const std::vector<double>& degrees, int rank_E, double degree_E);

struct DestabilizerOptions {
    double s_floor = 1e-2;        // ‖S‖_{L¹} below this: no destabilizer
    double cluster_factor = 10.0; // merge eigenvalue fields whose means differ by less than this × max std
    double flat_tol = 5e-2;       // max std of an eigenvalue field, relative to max |mean|
    double proj_tol = 1e-6;
};

enum class DestabilizerStatus { found, no_destabilizer, inconclusive };
const char* to_string(DestabilizerStatus s);

struct ProjectionPiece {
    int rank = 0;
    double degree = 0.0;              // deg(π_α)
    double idempotence_residual = 0.0;
    double adjoint_residual = 0.0;
    double dbar_residual = 0.0;       // ‖(Id − π)∂̄π‖_{L²}
    double higgs_residual = 0.0;      // ‖(Id − π)[φ, π]‖_{L²}
};

struct DestabilizerReport {
    DestabilizerStatus status = DestabilizerStatus::inconclusive;
    std::string reason;
    double s_l1 = 0.0;
    std::vector<double> field_mean;   // per pointwise-sorted eigenvalue field of u
    std::vector<double> field_std;
    double flatness = 0.0;            // max field std
    std::vector<double> lambdas;      // cluster values λ_1 < … < λ_l
    std::vector<int> multiplicity;
    std::vector<MatField> projections;  // π_α
    std::vector<ProjectionPiece> pieces;
    std::vector<int> filtration_rank;       // E_α = im(π_1 + … + π_α), α < l
    std::vector<double> filtration_degree;
    double nu = 0.0;
    double nu_deg_form = 0.0;
    double rank_identity_residual = 0.0;
    double residual_bound = 0.0;      // 10 × flatness / min gap + 1e-8
};

// u = S/‖S‖_{L¹} with S = log(Ĥ^{-1}H), eigen-projections clustered by spatial flatness, then ν.
DestabilizerReport extract_destabilizer(const MetricField& H, const MetricField& Hhat, const HiggsField& phi,
                                        const HiggsBundleSpec& spec, const TorusGeometry& geo,
                                        const DestabilizerOptions& opt = DestabilizerOptions());

std::string to_json(const DestabilizerReport& rep);

}  // namespace hfl
