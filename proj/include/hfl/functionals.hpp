#pragma once

#include "hfl/curvature.hpp"

namespace hfl {

// Ψ(x, y) = (x − y)^{-2} (e^{y−x} − (y − x) − 1); Ψ(x, x) = 1/2.
double psi(double x, double y);

// μ(K, ·) with the background pieces (K factorization, iΛF_{K,φ}) cached.
class DonaldsonFunctional {
public:
    DonaldsonFunctional(const MetricField& K, const HiggsField& phi, const TorusGeometry& geo,
                        double cap = kDegeneracyCap);
    double operator()(const MetricField& H) const;

    // S = log(K^{-1} H), K-self-adjoint, via the Hermitian eigenproblem in the K inner product.
    MatField log_ratio(const MetricField& H) const;

private:
    // S together with the eigen-decomposition K^{1/2} S K^{-1/2} = U diag(s) U^†.
    MatField decompose(const MetricField& H, std::vector<Mat>* U, std::vector<RVec>* s) const;

    const TorusGeometry* geo_;
    MetricField K_;
    HiggsField phi_;
    MatField iLF_;              // iΛF_{K,φ}
    std::vector<Mat> Ksqrt_;    // K^{1/2} per point
    std::vector<Mat> Kisqrt_;   // K^{-1/2} per point
    double cap_;
};

double donaldson(const MetricField& K, const MetricField& H, const HiggsField& phi, const TorusGeometry& geo);

struct DerivativeCheck {
    double max_rel_defect = 0.0;
    int samples_used = 0;
    std::vector<double> t;       // evaluated sample times
    std::vector<double> defect;  // relative defect at those times
};

// Central (nonuniform three-point) differences of μ against −2∫|Φ|². Only interior samples
// with 2∫|Φ|² ≥ window × its maximum are scored.
DerivativeCheck donaldson_derivative_check(const std::vector<double>& t, const std::vector<double>& mu,
                                           const std::vector<double>& l2_phi_sq, double window = 1e-3);

struct DegreeSlope {
    double degree = 0.0;
    double slope = 0.0;
    int rank = 0;
    double idempotence_residual = 0.0;  // sup ‖π² − π‖_F
    double adjoint_residual = 0.0;      // sup ‖π − π^{*Ĥ}‖_F
};

// deg(π) = (1/2π) ∫ tr(π iΛF_{Ĥ,φ}) − |D''_φ π|²_{Ĥ,ω}.
DegreeSlope degree_slope(const MatField& pi, const MetricField& Hhat, const HiggsField& phi,
                         const TorusGeometry& geo, double tol = 1e-6);

// Ĥ-orthogonal projection onto the span of the listed summands.
MatField summand_projection(const std::vector<int>& summands, const MetricField& Hhat);
DegreeSlope summand_degree(const std::vector<int>& summands, const MetricField& Hhat, const HiggsField& phi,
                           const TorusGeometry& geo);

struct BogomolovResult {
    bool degenerate = false;      // n = 1: only the norm-difference route, which is the L² defect
    double wedge = 0.0;           // ∫ tr(F⊥∧F⊥)
    double norm_difference = 0.0; // ∫ |F⊥|² − |ΛF⊥|²
    std::vector<double> integrand;  // pointwise wedge integrand (norm difference when degenerate)
};

BogomolovResult bogomolov(const MetricField& H, const HiggsField& phi, const HiggsBundleSpec& spec,
                          const TorusGeometry& geo);

struct WeitzenbockPoint {
    double lhs = 0.0;
    double rhs = 0.0;
    double defect = 0.0;
    double invariance_residual = 0.0;
};

// iΛ⟨s, −[θ, θ*]s⟩ against |θ*s − ⟨θ*s, s⟩ s/|s|²|² at one point; θ-invariance of s is required.
WeitzenbockPoint weitzenbock_point(const SVec& s, const std::vector<Mat>& theta, const Mat& H,
                                   const TorusGeometry& geo, double inv_tol = 1e-8);

struct WeitzenbockField {
    std::vector<double> defect;
    double max_defect = 0.0;
    double min_rhs = 0.0;
};

// s: r sections (entry a of the vector field), one value per grid point.
WeitzenbockField weitzenbock_check(const std::vector<CVec>& s, const HiggsField& theta, const MetricField& H,
                                   const TorusGeometry& geo, double inv_tol = 1e-8);

}  // namespace hfl
