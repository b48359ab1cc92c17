#include "hfl/curvature.hpp"

#include <cmath>

#include "hfl/small.hpp"

namespace hfl {

namespace {

MatField like(const MatField& m) { return MatField(m.r, m.flux, m.points()); }

bool is_zero(const MatField& m) {
    for (const auto& e : m.e)
        for (const auto& x : e)
            if (x != cplx(0.0)) return false;
    return true;
}

// Throws on non-positive or too badly conditioned H.
void degeneracy_guard(const MetricField& H, double cap, const char* where) {
    const MetricStats st = metric_stats(H);
    if (!(st.min_eig > 0.0)) throw Error(ErrorKind::metric, std::string("metric not positive definite (") + where + ")");
    if (st.max_cond > cap) throw DegeneracyError(st.worst_point, st.max_cond, where);
}

// θ_i = H^{-1} ∂_i H, i = 0..n-1.
std::vector<MatField> connection_form(const MetricField& H, const TorusGeometry& geo) {
    const int n = geo.n();
    std::vector<MatField> dH;
    for (int i = 0; i < n; ++i) dH.push_back(mat_derivative(H, i, false, geo));
    std::vector<MatField> theta;
    for (int i = 0; i < n; ++i) theta.push_back(like(H));
    const std::size_t P = H.points();
    if (H.r == 1) {
        const CVec& h = H(0, 0);
        for (int i = 0; i < n; ++i) {
            CVec& t = theta[i](0, 0);
            const CVec& d = dH[i](0, 0);
            for (std::size_t p = 0; p < P; ++p) t[p] = d[p] / h[p].real();
        }
        return theta;
    }
    parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            Mat L;
            small::chol(H.at(p), L);
            for (int i = 0; i < n; ++i) theta[i].set(p, small::chol_solve(L, dH[i].at(p)));
        }
    });
    return theta;
}

EndForm11 chern_from_theta(const MetricField& H, const std::vector<MatField>& theta, const TorusGeometry& geo) {
    const int n = geo.n();
    EndForm11 F;
    F.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            MatField c = mat_derivative(theta[i], j, true, geo);
            for (auto& e : c.e)
                for (auto& x : e) x = -x;
            F.c.push_back(std::move(c));
        }
    // constant curvature of the reference Landau connection, (πd/A) dz∧dz̄ per summand
    if (n == 1) {
        const double A = geo.covolume();
        for (int a = 0; a < H.r; ++a)
            if (H.flux[a] != 0) {
                const double v = kPi * H.flux[a] / A;
                for (auto& x : F.c[0](a, a)) x += v;
            }
    }
    return F;
}

// (2,0) coefficient of D_H^{1,0}φ and (0,2) coefficient of ∂̄φ^{*H} (n = 2).
void two_forms(const HiggsField& phi, const AntiHiggsField& star, const std::vector<MatField>& theta,
               const TorusGeometry& geo, CurvatureField& out) {
    if (geo.n() != 2) return;
    auto cov = [&](int j, int i) {
        // ∂_j φ_i + [θ_j, φ_i]
        MatField d = mat_derivative(phi.comp[i], j, false, geo);
        for (std::size_t p = 0; p < d.points(); ++p) {
            const Mat t = theta[j].at(p), f = phi.comp[i].at(p);
            d.set(p, d.at(p) + t * f - f * t);
        }
        return d;
    };
    MatField a = cov(0, 1), b = cov(1, 0);
    for (std::size_t k = 0; k < a.e.size(); ++k)
        for (std::size_t p = 0; p < a.e[k].size(); ++p) a.e[k][p] -= b.e[k][p];
    MatField c = mat_derivative(star.comp[1], 0, true, geo);
    MatField d = mat_derivative(star.comp[0], 1, true, geo);
    for (std::size_t k = 0; k < c.e.size(); ++k)
        for (std::size_t p = 0; p < c.e[k].size(); ++p) c.e[k][p] -= d.e[k][p];
    out.d10_phi = {std::move(a)};
    out.dbar_phistar = {std::move(c)};
}

}  // namespace

MatField mat_derivative(const MatField& X, int i, bool bar, const TorusGeometry& geo) {
    MatField out = like(X);
    for (int a = 0; a < X.r; ++a)
        for (int b = 0; b < X.r; ++b) geo.derivative(X(a, b), i, bar, X.charge(a, b), out(a, b));
    return out;
}

MatField i_contract(const EndForm11& f, const TorusGeometry& geo) {
    const int n = f.n;
    if (static_cast<int>(f.c.size()) != n * n) throw Error(ErrorKind::degree, "expected an End-valued (1,1)-form");
    MatField out = like(f.c[0]);
    const double lc = geo.lambda_factor();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx w = lc * geo.ginv()(j, i);
            if (w == cplx(0.0)) continue;
            const MatField& c = f.c[i * n + j];
            for (std::size_t k = 0; k < c.e.size(); ++k)
                for (std::size_t p = 0; p < c.e[k].size(); ++p) out.e[k][p] += w * c.e[k][p];
        }
    return out;
}

EndForm11 higgs_commutator(const HiggsField& phi, const AntiHiggsField& star, const TorusGeometry& geo) {
    const int n = geo.n();
    EndForm11 K;
    K.n = n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            MatField c = like(phi.comp[i]);
            if (!is_zero(phi.comp[i]) || !is_zero(star.comp[j])) {
                parallel_for(c.points(), [&](std::size_t b, std::size_t e) {
                    for (std::size_t p = b; p < e; ++p) {
                        const Mat f = phi.comp[i].at(p), s = star.comp[j].at(p);
                        c.set(p, f * s - s * f);
                    }
                });
            }
            K.c.push_back(std::move(c));
        }
    return K;
}

CurvatureField chern_curvature(const MetricField& H, const TorusGeometry& geo, double cap) {
    degeneracy_guard(H, cap, "chern_curvature");
    CurvatureField out;
    out.F = chern_from_theta(H, connection_form(H, geo), geo);
    return out;
}

CurvatureField full_hs_curvature(const MetricField& H, const HiggsField& phi, const TorusGeometry& geo, double cap) {
    degeneracy_guard(H, cap, "full_hs_curvature");
    const auto theta = connection_form(H, geo);
    const AntiHiggsField star = adjoint_higgs(phi, H);
    CurvatureField out;
    out.F = chern_from_theta(H, theta, geo);
    out.higgs_comm = higgs_commutator(phi, star, geo);
    two_forms(phi, star, theta, geo, out);
    return out;
}

RVec hself_eigenvalues(const Mat& X, const Mat& H) {
    if (X.rows() == 1) {
        RVec w(1);
        w(0) = X(0, 0).real();
        return w;
    }
    Mat L;
    small::chol(H, L);
    // L^{-1}(HX)L^{-†} is similar to X and Hermitian when H X = (H X)^†
    const Mat M = H * X;
    const Mat A = small::lower_solve(L, M);
    Mat Y = small::lower_solve(L, Mat(A.adjoint()));
    Y = 0.5 * (Y + Y.adjoint()).eval();
    RVec w;
    Mat V;
    small::herm_eigen(Y, w, V);
    return w;
}

double self_adjointness_defect(const MatField& Phi, const MetricField& H) {
    double d = 0.0;
    for (std::size_t p = 0; p < Phi.points(); ++p) {
        const Mat hp = H.at(p) * Phi.at(p);
        d = std::max(d, (hp - hp.adjoint()).norm() / (1.0 + hp.norm()));
    }
    return d;
}

ResidualField hitchin_simpson_residual(const MetricField& H, const HiggsField& phi, const HiggsBundleSpec& spec,
                                       const TorusGeometry& geo, double cap) {
    degeneracy_guard(H, cap, "hitchin_simpson_residual");
    if (H.r != spec.rank) throw Error(ErrorKind::shape, "metric rank differs from bundle rank");
    const auto theta = connection_form(H, geo);
    EndForm11 F = chern_from_theta(H, theta, geo);
    bool has_phi = false;
    for (const auto& c : phi.comp) has_phi = has_phi || !is_zero(c);
    if (has_phi) {
        const EndForm11 K = higgs_commutator(phi, adjoint_higgs(phi, H), geo);
        for (std::size_t q = 0; q < F.c.size(); ++q)
            for (std::size_t k = 0; k < F.c[q].e.size(); ++k)
                for (std::size_t p = 0; p < F.c[q].e[k].size(); ++p) F.c[q].e[k][p] += K.c[q].e[k][p];
    }
    ResidualField R;
    R.Phi = i_contract(F, geo);
    const double lam = spec.lambda(geo);
    for (int a = 0; a < R.Phi.r; ++a)
        for (auto& x : R.Phi(a, a)) x -= lam;

    const std::size_t P = H.points();
    R.op_norm.assign(P, 0.0);
    R.hs_sq.assign(P, 0.0);
    R.trace.assign(P, 0.0);
    if (R.Phi.r == 1) {
        const CVec& x = R.Phi(0, 0);
        for (std::size_t p = 0; p < P; ++p) {
            R.op_norm[p] = std::abs(x[p].real());
            R.hs_sq[p] = x[p].real() * x[p].real();
            R.trace[p] = x[p].real();
        }
    } else parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat X = R.Phi.at(p);
            const RVec ev = hself_eigenvalues(X, H.at(p));
            R.op_norm[p] = ev.cwiseAbs().maxCoeff();
            R.hs_sq[p] = ev.squaredNorm();
            R.trace[p] = X.trace().real();
        }
    });
    for (double v : R.op_norm) R.sup = std::max(R.sup, v);
    R.l1 = geo.integrate_real(R.op_norm);
    R.l2_sq = geo.integrate_real(R.hs_sq);
    R.trace_integral = geo.integrate_real(R.trace);
    return R;
}

}  // namespace hfl
