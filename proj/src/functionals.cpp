#include "hfl/functionals.hpp"

#include <cmath>

#include "hfl/matfun.hpp"

namespace hfl {

double psi(double x, double y) {
    const double d = y - x;
    if (std::abs(d) < 1e-4) {
        // (e^d − d − 1)/d² = Σ_{k≥0} d^k/(k+2)!
        double term = 0.5, sum = 0.0;
        for (int k = 0; k < 6; ++k) {
            sum += term;
            term *= d / (k + 3);
        }
        return sum;
    }
    return (std::expm1(d) - d) / (d * d);
}

namespace {

MatField like(const MatField& m) { return MatField(m.r, m.flux, m.points()); }

bool is_zero(const MatField& m) {
    for (const auto& e : m.e)
        for (const auto& x : e)
            if (x != cplx(0.0)) return false;
    return true;
}

bool all_zero(const HiggsField& phi) {
    for (const auto& c : phi.comp)
        if (!is_zero(c)) return false;
    return true;
}

// iΛF_{K,φ} = iΛ(F_K + [φ, φ^{*K}]).
MatField ilambda_hs(const MetricField& K, const HiggsField& phi, const TorusGeometry& geo, double cap) {
    CurvatureField cf = chern_curvature(K, geo, cap);
    if (!all_zero(phi)) {
        const EndForm11 C = higgs_commutator(phi, adjoint_higgs(phi, K), geo);
        for (std::size_t q = 0; q < cf.F.c.size(); ++q)
            for (std::size_t k = 0; k < cf.F.c[q].e.size(); ++k)
                for (std::size_t p = 0; p < cf.F.c[q].e[k].size(); ++p) cf.F.c[q].e[k][p] += C.c[q].e[k][p];
    }
    return i_contract(cf.F, geo);
}

// D''_φ X = ∂̄X + [φ, X]: the n (0,1) coefficients followed by the n (1,0) coefficients.
std::vector<MatField> dpp(const MatField& X, const HiggsField& phi, const TorusGeometry& geo) {
    const int n = geo.n();
    std::vector<MatField> out;
    for (int j = 0; j < n; ++j) out.push_back(mat_derivative(X, j, true, geo));
    for (int i = 0; i < n; ++i) {
        MatField c = like(X);
        const MatField& f = phi.comp[i];
        if (X.r == 1 || is_zero(f)) {
            out.push_back(std::move(c));
            continue;
        }
        for (std::size_t p = 0; p < X.points(); ++p) {
            const Mat a = f.at(p), x = X.at(p);
            c.set(p, a * x - x * a);
        }
        out.push_back(std::move(c));
    }
    return out;
}

// Form-metric weight ⟨e_u, e_v⟩ between the basis covectors of dpp's output (dz̄^j first, then dz^i).
cplx form_weight(int u, int v, const TorusGeometry& geo) {
    const int n = geo.n();
    const double lc = geo.lambda_factor();
    if (u < n && v < n) return lc * geo.ginv()(u, v);
    if (u >= n && v >= n) return lc * geo.ginv()(v - n, u - n);
    return 0.0;
}

}  // namespace

DonaldsonFunctional::DonaldsonFunctional(const MetricField& K, const HiggsField& phi, const TorusGeometry& geo,
                                         double cap)
    : geo_(&geo), K_(K), phi_(phi), cap_(cap) {
    iLF_ = ilambda_hs(K, phi, geo, cap);
    Ksqrt_.resize(K.points());
    Kisqrt_.resize(K.points());
    for (std::size_t p = 0; p < K.points(); ++p) {
        const Mat k = K.at(p);
        Ksqrt_[p] = herm_sqrt(k);
        Kisqrt_[p] = herm_isqrt(k);
    }
}

MatField DonaldsonFunctional::log_ratio(const MetricField& H) const { return decompose(H, nullptr, nullptr); }

MatField DonaldsonFunctional::decompose(const MetricField& H, std::vector<Mat>* U, std::vector<RVec>* sv) const {
    MatField S = like(H);
    if (U) U->resize(H.points());
    if (sv) sv->resize(H.points());
    if (H.r == 1) {
        for (std::size_t p = 0; p < H.points(); ++p) {
            const double x = H(0, 0)[p].real() / K_(0, 0)[p].real();
            if (!(x > 0.0)) throw DegeneracyError(p, std::numeric_limits<double>::infinity(), "donaldson");
            S(0, 0)[p] = std::log(x);
            if (U) (*U)[p] = Mat::Identity(1, 1);
            if (sv) (*sv)[p] = RVec::Constant(1, std::log(x));
        }
        return S;
    }
    std::vector<double> cond(H.points(), 0.0);
    parallel_for(H.points(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat ht = herm_part(Kisqrt_[p] * H.at(p) * Kisqrt_[p]);
            RVec ev;
            Mat V;
            small::herm_eigen(ht, ev, V);
            cond[p] = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : std::numeric_limits<double>::infinity();
            RVec s = ev;
            for (int i = 0; i < s.size(); ++i) s(i) = std::log(std::max(ev(i), 1e-300));
            const Mat L = V * s.asDiagonal() * V.adjoint();
            S.set(p, Kisqrt_[p] * L * Ksqrt_[p]);
            if (U) (*U)[p] = V;
            if (sv) (*sv)[p] = s;
        }
    });
    for (std::size_t p = 0; p < cond.size(); ++p)
        if (!(cond[p] <= cap_)) throw DegeneracyError(p, cond[p], "donaldson");
    return S;
}

double DonaldsonFunctional::operator()(const MetricField& H) const {
    const TorusGeometry& geo = *geo_;
    std::vector<Mat> Us;
    std::vector<RVec> evs;
    const bool scalar = H.r == 1;
    const MatField S = decompose(H, scalar ? nullptr : &Us, scalar ? nullptr : &evs);
    const std::vector<MatField> D = dpp(S, phi_, geo);
    const int m = static_cast<int>(D.size());
    std::vector<double> dens(H.points(), 0.0);
    if (scalar) {
        // Ψ(s,s) = 1/2 and the eigenbasis is trivial
        for (std::size_t p = 0; p < H.points(); ++p) {
            cplx q = 0.0;
            for (int u = 0; u < m; ++u)
                for (int t = 0; t < m; ++t) {
                    const cplx fw = form_weight(u, t, geo);
                    if (fw != cplx(0.0)) q += 0.5 * fw * D[u](0, 0)[p] * std::conj(D[t](0, 0)[p]);
                }
            dens[p] = (S(0, 0)[p] * iLF_(0, 0)[p]).real() + q.real();
        }
        return geo.integrate_real(dens);
    }
    parallel_for(H.points(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat s = S.at(p);
            double v = (s * iLF_.at(p)).trace().real();
            // K-unitary eigenbasis of S: columns of K^{-1/2} U
            const Mat& U = Us[p];
            const RVec& ev = evs[p];
            const Mat to = U.adjoint() * Ksqrt_[p];
            const Mat from = Kisqrt_[p] * U;
            std::vector<Mat> Dt(m);
            for (int u = 0; u < m; ++u) Dt[u] = to * D[u].at(p) * from;
            const int r = S.r;
            cplx q = 0.0;
            for (int a = 0; a < r; ++a)
                for (int c = 0; c < r; ++c) {
                    const double w = psi(ev(c), ev(a));
                    for (int u = 0; u < m; ++u)
                        for (int t = 0; t < m; ++t) {
                            const cplx fw = form_weight(u, t, geo);
                            if (fw == cplx(0.0)) continue;
                            q += w * fw * Dt[u](a, c) * std::conj(Dt[t](a, c));
                        }
                }
            dens[p] = v + q.real();
        }
    });
    return geo.integrate_real(dens);
}

double donaldson(const MetricField& K, const MetricField& H, const HiggsField& phi, const TorusGeometry& geo) {
    return DonaldsonFunctional(K, phi, geo)(H);
}

DerivativeCheck donaldson_derivative_check(const std::vector<double>& t, const std::vector<double>& mu,
                                           const std::vector<double>& l2_phi_sq, double window) {
    DerivativeCheck out;
    const std::size_t n = t.size();
    if (mu.size() != n || l2_phi_sq.size() != n) throw Error(ErrorKind::shape, "series lengths differ");
    if (n < 3) throw Error(ErrorKind::parameter, "derivative check needs at least 3 samples");
    double mx = 0.0;
    for (double v : l2_phi_sq) mx = std::max(mx, 2.0 * v);
    if (mx == 0.0) return out;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double target = 2.0 * l2_phi_sq[i];
        if (target < window * mx) continue;
        const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
        if (h1 <= 0.0 || h2 <= 0.0) continue;
        const double d = -h2 / (h1 * (h1 + h2)) * mu[i - 1] + (h2 - h1) / (h1 * h2) * mu[i] +
                         h1 / (h2 * (h1 + h2)) * mu[i + 1];
        const double rel = std::abs(d + target) / target;
        out.t.push_back(t[i]);
        out.defect.push_back(rel);
        out.max_rel_defect = std::max(out.max_rel_defect, rel);
        ++out.samples_used;
    }
    return out;
}

DegreeSlope degree_slope(const MatField& pi, const MetricField& Hhat, const HiggsField& phi,
                         const TorusGeometry& geo, double tol) {
    DegreeSlope out;
    const std::size_t P = pi.points();
    std::vector<double> tr(P);
    for (std::size_t p = 0; p < P; ++p) {
        const Mat x = pi.at(p), h = Hhat.at(p);
        out.idempotence_residual = std::max(out.idempotence_residual, (x * x - x).norm());
        Mat L;
        if (!small::chol(h, L)) throw Error(ErrorKind::metric, "background metric not positive definite");
        const Mat adj = small::chol_solve(L, Mat(x.adjoint() * h));
        out.adjoint_residual = std::max(out.adjoint_residual, (x - adj).norm());
        tr[p] = x.trace().real();
    }
    if (out.idempotence_residual > tol || out.adjoint_residual > tol)
        throw Error(ErrorKind::projection, "not an orthogonal projection: idempotence residual " +
                                               std::to_string(out.idempotence_residual) + ", adjoint residual " +
                                               std::to_string(out.adjoint_residual));
    out.rank = static_cast<int>(std::lround(geo.integrate_real(tr) / geo.volume()));

    const MatField iLF = ilambda_hs(Hhat, phi, geo, kDegeneracyCap);
    const std::vector<MatField> D = dpp(pi, phi, geo);
    const int m = static_cast<int>(D.size());
    std::vector<double> dens(P);
    parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat h = Hhat.at(p);
            Mat L;
            small::chol(h, L);
            double v = (pi.at(p) * iLF.at(p)).trace().real();
            cplx q = 0.0;
            for (int u = 0; u < m; ++u)
                for (int t = 0; t < m; ++t) {
                    const cplx fw = form_weight(u, t, geo);
                    if (fw == cplx(0.0)) continue;
                    const Mat At = D[t].at(p);
                    const Mat star = small::chol_solve(L, Mat(At.adjoint() * h));
                    q += fw * (D[u].at(p) * star).trace();
                }
            dens[p] = v - q.real();
        }
    });
    out.degree = geo.integrate_real(dens) / (2.0 * kPi);
    out.slope = out.rank > 0 ? out.degree / out.rank : 0.0;
    return out;
}

MatField summand_projection(const std::vector<int>& summands, const MetricField& Hhat) {
    const int r = Hhat.r;
    const int k = static_cast<int>(summands.size());
    Mat E = Mat::Zero(r, k);
    for (int c = 0; c < k; ++c) {
        if (summands[c] < 0 || summands[c] >= r) throw Error(ErrorKind::parameter, "summand index out of range");
        E(summands[c], c) = 1.0;
    }
    MatField pi = like(Hhat);
    for (std::size_t p = 0; p < Hhat.points(); ++p) {
        const Mat h = Hhat.at(p);
        const Mat G = E.adjoint() * h * E;
        pi.set(p, E * G.inverse() * E.adjoint() * h);
    }
    return pi;
}

DegreeSlope summand_degree(const std::vector<int>& summands, const MetricField& Hhat, const HiggsField& phi,
                           const TorusGeometry& geo) {
    return degree_slope(summand_projection(summands, Hhat), Hhat, phi, geo);
}

BogomolovResult bogomolov(const MetricField& H, const HiggsField& phi, const HiggsBundleSpec& spec,
                          const TorusGeometry& geo) {
    if (H.r != spec.rank) throw Error(ErrorKind::shape, "metric rank differs from bundle rank");
    const int n = geo.n();
    const int r = H.r;
    CurvatureField cf = full_hs_curvature(H, phi, geo);
    for (std::size_t q = 0; q < cf.F.c.size(); ++q)
        for (std::size_t k = 0; k < cf.F.c[q].e.size(); ++k)
            for (std::size_t p = 0; p < cf.F.c[q].e[k].size(); ++p) cf.F.c[q].e[k][p] += cf.higgs_comm.c[q].e[k][p];

    const std::size_t P = H.points();
    const double lc = geo.lambda_factor();
    const Eigen::MatrixXcd& gi = geo.ginv();
    const double detg = geo.g().determinant().real();
    std::vector<double> wedge(P, 0.0), normdiff(P, 0.0);
    auto perp = [r](Mat x) {
        const cplx t = x.trace() / static_cast<double>(r);
        for (int a = 0; a < r; ++a) x(a, a) -= t;
        return x;
    };
    parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat h = H.at(p);
            Mat L;
            small::chol(h, L);
            auto star = [&](const Mat& x) { return small::chol_solve(L, Mat(x.adjoint() * h)); };
            std::vector<Mat> C(n * n);
            for (int q = 0; q < n * n; ++q) C[q] = perp(cf.F.c[q].at(p));
            // |F⊥^{1,1}|² with ⟨dz^i, dz^k⟩ = λ_c g^{ki} and ⟨dz̄^j, dz̄^l⟩ = λ_c g^{jl}
            cplx nf = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            const cplx w = lc * lc * gi(k, i) * gi(j, l);
                            if (w == cplx(0.0)) continue;
                            nf += w * (C[i * n + j] * star(C[k * n + l])).trace();
                        }
            // ΛF⊥ = −i X with X the iΛ contraction
            Mat X = Mat::Zero(r, r);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) X += lc * gi(j, i) * C[i * n + j];
            cplx nl = (X * star(X)).trace();
            if (n == 2) {
                const Mat A = perp(cf.d10_phi[0].at(p)), B = perp(cf.dbar_phistar[0].at(p));
                const double w2 = lc * lc / detg;  // |dz¹∧dz²|² = λ_c² det g^{-1}
                nf += w2 * ((A * star(A)).trace() + (B * star(B)).trace());
                // tr(F⊥∧F⊥) as a multiple of the volume form; dz¹∧dz̄¹∧dz²∧dz̄² = −4 det(g)^{-1} dvol
                const cplx wv = -8.0 * (C[0] * C[3]).trace() + 8.0 * (C[1] * C[2]).trace() + 8.0 * (A * B).trace();
                wedge[p] = wv.real() / detg;
            }
            normdiff[p] = (nf - nl).real();
        }
    });
    BogomolovResult out;
    out.norm_difference = geo.integrate_real(normdiff);
    if (n == 1) {
        out.degenerate = true;
        out.wedge = out.norm_difference;
        out.integrand = normdiff;
    } else {
        out.wedge = geo.integrate_real(wedge);
        out.integrand = wedge;
    }
    return out;
}

WeitzenbockPoint weitzenbock_point(const SVec& s, const std::vector<Mat>& theta, const Mat& H,
                                   const TorusGeometry& geo, double inv_tol) {
    const int n = geo.n();
    if (static_cast<int>(theta.size()) != n) throw Error(ErrorKind::shape, "θ needs one component per dimension");
    WeitzenbockPoint out;
    auto ip = [&](const SVec& u, const SVec& v) { return cplx((v.adjoint() * H * u)(0, 0)); };  // ⟨u, v⟩_H
    const double ss = ip(s, s).real();
    if (!(ss > 0.0)) throw Error(ErrorKind::parameter, "section vanishes");
    Mat L;
    if (!small::chol(H, L)) throw Error(ErrorKind::metric, "metric not positive definite");
    std::vector<Mat> ts(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        ts[i] = small::chol_solve(L, Mat(theta[i].adjoint() * H));
        const cplx eta = ip(theta[i] * s, s) / ss;
        const SVec res = theta[i] * s - eta * s;
        out.invariance_residual = std::max(out.invariance_residual, std::sqrt(ip(res, res).real()));
        scale = std::max(scale, theta[i].norm());
    }
    if (out.invariance_residual > inv_tol * (1.0 + scale) * std::sqrt(ss))
        throw Error(ErrorKind::invariance, "section is not θ-invariant: residual " +
                                               std::to_string(out.invariance_residual));
    const double lc = geo.lambda_factor();
    std::vector<SVec> w(n);
    for (int j = 0; j < n; ++j) {
        const SVec u = ts[j] * s;
        w[j] = u - (ip(u, s) / ss) * s;
    }
    cplx lhs = 0.0, rhs = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx c = lc * geo.ginv()(j, i);
            if (c == cplx(0.0)) continue;
            const Mat K = theta[i] * ts[j] - ts[j] * theta[i];
            lhs += c * ip(K * s, s);
            rhs += c * ip(w[j], w[i]);
        }
    out.lhs = lhs.real();
    out.rhs = rhs.real();
    out.defect = std::abs(lhs - rhs);
    return out;
}

WeitzenbockField weitzenbock_check(const std::vector<CVec>& s, const HiggsField& theta, const MetricField& H,
                                   const TorusGeometry& geo, double inv_tol) {
    const int r = H.r;
    if (static_cast<int>(s.size()) != r) throw Error(ErrorKind::shape, "section needs one array per summand");
    WeitzenbockField out;
    out.defect.assign(H.points(), 0.0);
    out.min_rhs = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < H.points(); ++p) {
        SVec v(r);
        for (int a = 0; a < r; ++a) v(a) = s[a][p];
        std::vector<Mat> th;
        for (const auto& c : theta.comp) th.push_back(c.at(p));
        const WeitzenbockPoint w = weitzenbock_point(v, th, H.at(p), geo, inv_tol);
        out.defect[p] = w.defect;
        out.max_defect = std::max(out.max_defect, w.defect);
        out.min_rhs = std::min(out.min_rhs, w.rhs);
    }
    return out;
}

}  // namespace hfl
