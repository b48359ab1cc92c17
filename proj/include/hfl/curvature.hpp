#pragma once

#include "hfl/fields.hpp"

namespace hfl {

// End-valued (1,1)-form Σ C_ij dz^i∧dz̄^j, stored as n*n matrix fields (index i*n + j).
struct EndForm11 {
    int n = 1;
    std::vector<MatField> c;
};

struct CurvatureField {
    EndForm11 F;            // Chern curvature F_H
    EndForm11 higgs_comm;   // [φ, φ^{*H}]
    // (2,0) coefficient of dz¹∧dz² (D_H^{1,0}φ) and (0,2) coefficient of dz̄¹∧dz̄² (∂̄φ^{*H});
    // present only for n = 2.
    std::vector<MatField> d10_phi;
    std::vector<MatField> dbar_phistar;
};

struct ResidualField {
    MatField Phi;
    std::vector<double> op_norm;  // pointwise H-operator norm |Φ|
    std::vector<double> hs_sq;    // pointwise tr(Φ Φ^{*H})
    std::vector<double> trace;    // pointwise tr Φ (real)
    double sup = 0.0;
    double l1 = 0.0;
    double l2_sq = 0.0;
    double trace_integral = 0.0;
};

constexpr double kDegeneracyCap = 1e12;

// ∂_i (bar = false) or ∂̄_i (bar = true) of every entry, covariant in each entry's charge.
MatField mat_derivative(const MatField& X, int i, bool bar, const TorusGeometry& geo);

// iΛ of an End-valued (1,1)-form.
MatField i_contract(const EndForm11& a, const TorusGeometry& geo);

// F_H = F_ref + ∂̄(H^{-1}∂H); throws DegeneracyError when sup cond(H) exceeds `cap`.
CurvatureField chern_curvature(const MetricField& H, const TorusGeometry& geo, double cap = kDegeneracyCap);

// All four bidegree parts of F_{H,φ}.
CurvatureField full_hs_curvature(const MetricField& H, const HiggsField& phi, const TorusGeometry& geo,
                                 double cap = kDegeneracyCap);

// Φ = iΛ(F_H + [φ, φ^{*H}]) − λ Id with λ = 2π μ/Vol.
ResidualField hitchin_simpson_residual(const MetricField& H, const HiggsField& phi, const HiggsBundleSpec& spec,
                                       const TorusGeometry& geo, double cap = kDegeneracyCap);

// Pointwise eigenvalues of an H-self-adjoint endomorphism field (ascending).
RVec hself_eigenvalues(const Mat& X, const Mat& H);

// max_x ‖HΦ − (HΦ)^†‖_F / (1 + ‖HΦ‖_F).
double self_adjointness_defect(const MatField& Phi, const MetricField& H);

// [φ, φ^{*H}] as an End-valued (1,1)-form.
EndForm11 higgs_commutator(const HiggsField& phi, const AntiHiggsField& star, const TorusGeometry& geo);

}  // namespace hfl
