#pragma once

#include <vector>

#include "hfl/geometry.hpp"

namespace hfl {

// Grid of r×r matrices. Summand k carries flux[k]; entry (a,b) is a section of charge
// flux[a] − flux[b]. All matrices are expressed in the unitary frame of the constant-curvature
// reference metric, where that reference metric is the identity.
struct MatField {
    int r = 0;
    std::vector<int> flux;
    std::vector<CVec> e;  // entry (a,b) at index a*r + b

    MatField() = default;
    MatField(int rank, std::vector<int> fluxes, std::size_t points);

    std::size_t points() const { return e.empty() ? 0 : e[0].size(); }
    int charge(int a, int b) const { return flux[a] - flux[b]; }
    CVec& operator()(int a, int b) { return e[a * r + b]; }
    const CVec& operator()(int a, int b) const { return e[a * r + b]; }
    Mat at(std::size_t p) const {
        Mat m(r, r);
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) m(a, b) = e[a * r + b][p];
        return m;
    }
    void set(std::size_t p, const Mat& m) {
        for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b) e[a * r + b][p] = m(a, b);
    }

    static MatField identity(int rank, std::vector<int> fluxes, std::size_t points);
    static MatField constant(const Mat& m, std::vector<int> fluxes, std::size_t points);
};

using MetricField = MatField;

// φ = Σ_i φ_i dz^i; comp[i] is φ_i.
struct HiggsField {
    std::vector<MatField> comp;
};

// φ^{*H} = Σ_i (φ^{*H})_ī dz̄^i; comp[i] = H^{-1} φ_i^† H.
struct AntiHiggsField {
    std::vector<MatField> comp;
};

struct HiggsEntry {
    int component = 0;  // i in φ_i dz^i
    int row = 0;
    int col = 0;
    cplx value{0.0, 0.0};
    // −1: constant entry (needs equal fluxes). k ≥ 0: value times the k-th standard theta
    // section of the charge d_row − d_col ≥ 1 line bundle.
    int theta_index = -1;
};

struct HiggsBundleSpec {
    int rank = 1;
    std::vector<int> fluxes{0};
    std::vector<HiggsEntry> higgs;
    double amplitude = 1.0;

    int degree() const;
    double slope() const { return static_cast<double>(degree()) / rank; }
    // λ = 2π μ / Vol.
    double lambda(const TorusGeometry& geo) const;
    void validate(const TorusGeometry& geo) const;
};

// k-th holomorphic section of the charge-d bundle (d ≥ 1, 0 ≤ k < d) in the Landau gauge.
Field theta_section(int d, int k, const TorusGeometry& geo);

HiggsField make_higgs(const HiggsBundleSpec& spec, const TorusGeometry& geo);
HiggsField zero_higgs(const HiggsBundleSpec& spec, const TorusGeometry& geo);

// Constant-curvature reference metric of the flux-d line bundle (rank 1, identity in its frame).
MetricField make_line_bundle_metric(int flux, const TorusGeometry& geo);
MetricField reference_metric(const HiggsBundleSpec& spec, const TorusGeometry& geo);

AntiHiggsField adjoint_higgs(const HiggsField& phi, const MetricField& H);

struct HiggsValidation {
    double dbar_residual = 0.0;         // sup_x,i,j |∂̄_j φ_i|
    double commutator_residual = 0.0;   // sup_x,i,j ‖[φ_i, φ_j]‖_F
    double scale = 0.0;                 // sup_x,i ‖φ_i‖_F
    double tol_hol = 0.0;
    double tol_int = 0.0;
    bool pass = true;
};

// Tolerances are tol_rel × scale for ∂̄φ and tol_rel × scale² for the (quadratic) commutator.
HiggsValidation validate_higgs(const HiggsField& phi, const TorusGeometry& geo, double tol_rel = 1e-8);

struct EndoNorms {
    double sup = 0.0;          // sup_x |φ|_{H,ω}
    double l2_sq = 0.0;        // ∫ |φ|²
    double log_moment = 0.0;   // ∫ (log(|φ|² + e))^b
};

// Pointwise |φ|² = tr(iΛ(φ∧φ^{*H})).
std::vector<double> higgs_norm_sq(const HiggsField& phi, const MetricField& H, const TorusGeometry& geo);
EndoNorms endo_norms(const HiggsField& phi, const MetricField& H, const TorusGeometry& geo, double b = 1.0);

// Throws a metric error naming the first grid point where H is not Hermitian positive definite.
void check_metric(const MetricField& H, double herm_tol = 1e-10);

struct MetricStats {
    double min_eig = 0.0;
    double max_cond = 0.0;
    std::size_t worst_point = 0;
};
MetricStats metric_stats(const MetricField& H);

// Conjugations used by the invariance checks: H → U^† H U, φ → U^{-1} φ U for constant unitary U.
MetricField conjugate_metric(const MetricField& H, const Mat& U);
HiggsField conjugate_higgs(const HiggsField& phi, const Mat& U);

}  // namespace hfl
