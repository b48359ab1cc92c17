#include "hfl/stability.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hfl/small.hpp"
#include "json.hpp"

namespace hfl {

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::polystable: return "polystable";
        case Stability::strictly_semistable: return "strictly_semistable";
        case Stability::unstable: return "unstable";
    }
    return "?";
}

const char* to_string(DestabilizerStatus s) {
    switch (s) {
        case DestabilizerStatus::found: return "found";
        case DestabilizerStatus::no_destabilizer: return "no_destabilizer";
        case DestabilizerStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

struct Arrow {
    int from, to;  // φ maps e_from into e_to
};

int popcount(unsigned m) { return __builtin_popcount(m); }

// Subsets are bitmasks over summands.
struct Catalog {
    int r = 0;
    std::vector<int> flux;
    std::vector<Arrow> arrows;

    bool invariant(unsigned sub) const {
        for (const Arrow& a : arrows)
            if ((sub >> a.from & 1u) && !(sub >> a.to & 1u)) return false;
        return true;
    }
    long long degree(unsigned sub) const {
        long long d = 0;
        for (int k = 0; k < r; ++k)
            if (sub >> k & 1u) d += flux[k];
        return d;
    }
    Rational slope(unsigned sub) const { return Rational(degree(sub), popcount(sub)); }

    // proper nonempty subsets of `within`
    template <class F>
    void each_sub(unsigned within, F&& f) const {
        for (unsigned s = (within - 1) & within; s; s = (s - 1) & within) f(s);
    }

    bool stable(unsigned blk) const {
        bool ok = true;
        const Rational mu = slope(blk);
        each_sub(blk, [&](unsigned s) {
            if (invariant(s) && slope(s) >= mu) ok = false;
        });
        return ok;
    }

    // blk is assumed semistable and φ-invariant with invariant complement in the parent.
    bool polystable(unsigned blk) const {
        if (stable(blk)) return true;
        const Rational mu = slope(blk);
        bool ok = false;
        each_sub(blk, [&](unsigned s) {
            if (ok) return;
            const unsigned c = blk & ~s;
            if (invariant(s) && invariant(c) && slope(s) == mu && polystable(s) && polystable(c)) ok = true;
        });
        return ok;
    }
};

Catalog catalog_of(const HiggsBundleSpec& spec) {
    Catalog c;
    c.r = spec.rank;
    c.flux = spec.fluxes;
    if (static_cast<int>(spec.fluxes.size()) != spec.rank || spec.rank < 1 || spec.rank > kMaxRank)
        throw Error(ErrorKind::shape, "fluxes must list one integer per summand (rank 1.." +
                                          std::to_string(kMaxRank) + ")");
    int ncomp = 0;
    for (const HiggsEntry& h : spec.higgs) ncomp = std::max(ncomp, h.component + 1);
    std::vector<bool> has_diag(ncomp, false), has_off(ncomp, false);
    for (const HiggsEntry& h : spec.higgs) {
        if (h.row < 0 || h.row >= c.r || h.col < 0 || h.col >= c.r || h.component < 0)
            throw Error(ErrorKind::shape, "Higgs entry index out of range");
        if (h.value == cplx(0.0)) continue;
        const int q = spec.fluxes[h.row] - spec.fluxes[h.col];
        if (h.theta_index < 0 && q != 0)
            throw Error(ErrorKind::unsupported, "constant Higgs entry couples summands of different flux");
        if (h.theta_index >= 0 && q < 1)
            throw Error(ErrorKind::unsupported, "theta-section Higgs entry needs positive charge");
        if (h.row == h.col) {
            has_diag[h.component] = true;
        } else {
            has_off[h.component] = true;
            c.arrows.push_back({h.col, h.row});
        }
    }
    for (int i = 0; i < ncomp; ++i)
        if (has_diag[i] && has_off[i])
            throw Error(ErrorKind::unsupported,
                        "Higgs component " + std::to_string(i) + " mixes diagonal and off-diagonal entries");
    // off-diagonal support must be acyclic, otherwise invariant subspaces need not be coordinate ones
    std::vector<int> state(c.r, 0);
    std::function<bool(int)> cyclic = [&](int v) {
        state[v] = 1;
        for (const Arrow& a : c.arrows)
            if (a.from == v) {
                if (state[a.to] == 1) return true;
                if (state[a.to] == 0 && cyclic(a.to)) return true;
            }
        state[v] = 2;
        return false;
    };
    for (int v = 0; v < c.r; ++v)
        if (state[v] == 0 && cyclic(v)) throw Error(ErrorKind::unsupported, "Higgs field support has a cycle");
    return c;
}

Witness witness_of(const Catalog& c, unsigned s) {
    Witness w;
    for (int k = 0; k < c.r; ++k)
        if (s >> k & 1u) w.summands.push_back(k);
    w.rank = popcount(s);
    w.degree = c.degree(s);
    w.slope = c.slope(s);
    return w;
}

}  // namespace

ScenarioClass classify(const HiggsBundleSpec& spec) {
    const Catalog c = catalog_of(spec);
    const unsigned full = (1u << c.r) - 1u;
    ScenarioClass out;
    out.slope = c.slope(full);

    unsigned best = 0, equal_open = 0, equal_split = 0;
    c.each_sub(full, [&](unsigned s) {
        if (!c.invariant(s)) return;
        const Rational m = c.slope(s);
        if (m > out.slope) {
            if (!best || m > c.slope(best) || (m == c.slope(best) && popcount(s) > popcount(best)) ||
                (m == c.slope(best) && popcount(s) == popcount(best) && s < best))
                best = s;
        } else if (m == out.slope) {
            const bool comp_inv = c.invariant(full & ~s);
            unsigned& slot = comp_inv ? equal_split : equal_open;
            if (!slot || s < slot) slot = s;
        }
    });
    if (best) {
        out.kind = Stability::unstable;
        out.witness = witness_of(c, best);
    } else if (!equal_open && !equal_split) {
        out.kind = Stability::stable;
    } else if (c.polystable(full)) {
        out.kind = Stability::polystable;
        out.witness = witness_of(c, equal_split);
    } else {
        out.kind = Stability::strictly_semistable;
        out.witness = witness_of(c, equal_open ? equal_open : equal_split);
    }
    return out;
}

Rational nu_invariant(const std::vector<Rational>& lambdas, const std::vector<int>& ranks,
                      const std::vector<long long>& degrees, const HiggsBundleSpec& spec) {
    const std::size_t l = lambdas.size();
    if (l < 1 || ranks.size() + 1 != l || degrees.size() + 1 != l)
        throw Error(ErrorKind::filtration, "need l eigenvalues and l − 1 filtration steps");
    for (std::size_t a = 0; a + 1 < l; ++a) {
        if (!(lambdas[a] < lambdas[a + 1])) throw Error(ErrorKind::filtration, "eigenvalues must increase strictly");
        if (ranks[a] < 1 || ranks[a] >= spec.rank || (a > 0 && ranks[a] <= ranks[a - 1]))
            throw Error(ErrorKind::filtration, "filtration ranks must increase strictly inside (0, rank E)");
    }
    const Rational rankE(spec.rank), degE(spec.degree());
    const Rational muE = degE / rankE;
    Rational ident = lambdas[l - 1] * rankE, nu(0), nu_deg = lambdas[l - 1] * degE;
    for (std::size_t a = 0; a + 1 < l; ++a) {
        const Rational d = lambdas[a + 1] - lambdas[a];
        ident -= d * Rational(ranks[a]);
        nu += d * Rational(ranks[a]) * (muE - Rational(degrees[a], ranks[a]));
        nu_deg -= d * Rational(degrees[a]);
    }
    if (ident != Rational(0))
        throw Error(ErrorKind::filtration, "rank identity violated: λ_l rank(E) − Σ(λ_{α+1} − λ_α) rank(E_α) = " +
                                               std::to_string(boost::rational_cast<double>(ident)));
    if (nu != nu_deg) throw Error(ErrorKind::numerical, "ν forms disagree");
    return nu;
}

NuValue nu_value(const std::vector<double>& lambdas, const std::vector<int>& ranks,
                 const std::vector<double>& degrees, int rank_E, double degree_E) {
    const std::size_t l = lambdas.size();
    if (l < 1 || ranks.size() + 1 != l || degrees.size() + 1 != l)
        throw Error(ErrorKind::filtration, "need l eigenvalues and l − 1 filtration steps");
    NuValue v;
    const double muE = degree_E / rank_E;
    v.rank_identity = lambdas[l - 1] * rank_E;
    v.nu_deg_form = lambdas[l - 1] * degree_E;
    for (std::size_t a = 0; a + 1 < l; ++a) {
        const double d = lambdas[a + 1] - lambdas[a];
        v.rank_identity -= d * ranks[a];
        v.nu += d * ranks[a] * (muE - degrees[a] / ranks[a]);
        v.nu_deg_form -= d * degrees[a];
    }
    return v;
}

namespace {

// Σ_{u,t} ⟨e_u, e_t⟩ tr(A_u A_t^{*Ĥ}) integrated; A lists the n (0,1) then the n (1,0) coefficients.
double l2_norm(const std::vector<MatField>& A, const MetricField& Hhat, const TorusGeometry& geo) {
    const int n = geo.n();
    const double lc = geo.lambda_factor();
    const std::size_t P = Hhat.points();
    std::vector<double> dens(P, 0.0);
    for (std::size_t p = 0; p < P; ++p) {
        const Mat h = Hhat.at(p);
        Mat L;
        small::chol(h, L);
        cplx q = 0.0;
        for (int u = 0; u < 2 * n; ++u)
            for (int t = 0; t < 2 * n; ++t) {
                if ((u < n) != (t < n)) continue;
                const cplx w = u < n ? lc * geo.ginv()(u, t) : lc * geo.ginv()(t - n, u - n);
                const Mat At = A[t].at(p);
                q += w * (A[u].at(p) * small::chol_solve(L, Mat(At.adjoint() * h))).trace();
            }
        dens[p] = q.real();
    }
    return std::sqrt(std::max(0.0, geo.integrate_real(dens)));
}

MatField like(const MatField& m) { return MatField(m.r, m.flux, m.points()); }

}  // namespace

DestabilizerReport extract_destabilizer(const MetricField& H, const MetricField& Hhat, const HiggsField& phi,
                                        const HiggsBundleSpec& spec, const TorusGeometry& geo,
                                        const DestabilizerOptions& opt) {
    DestabilizerReport rep;
    const int r = H.r;
    const std::size_t P = H.points();
    if (Hhat.r != r || Hhat.points() != P) throw Error(ErrorKind::shape, "metric shapes differ");

    // pointwise generalized eigenproblem H w = e^s Ĥ w; W = L^{-†}V is Ĥ-orthonormal
    std::vector<RVec> s(P);
    std::vector<Mat> W(P);
    std::vector<double> abs_tr(P);
    for (std::size_t p = 0; p < P; ++p) {
        Mat L;
        if (!small::chol(Hhat.at(p), L)) throw Error(ErrorKind::metric, "background metric not positive definite");
        const Mat Li = small::lower_solve(L, Mat::Identity(r, r));
        Mat Y = Li * H.at(p) * Li.adjoint();
        Y = 0.5 * (Y + Y.adjoint()).eval();
        RVec w;
        Mat V;
        small::herm_eigen(Y, w, V);
        s[p].resize(r);
        double a = 0.0;
        for (int k = 0; k < r; ++k) {
            if (!(w(k) > 0.0)) throw Error(ErrorKind::metric, "metric not positive definite at point " + std::to_string(p));
            s[p](k) = std::log(w(k));
            a += std::abs(s[p](k));
        }
        abs_tr[p] = a;
        W[p] = Li.adjoint() * V;
    }
    rep.s_l1 = geo.integrate_real(abs_tr);
    if (!(rep.s_l1 >= opt.s_floor)) {
        rep.status = DestabilizerStatus::no_destabilizer;
        rep.reason = "‖S‖_L1 = " + std::to_string(rep.s_l1) + " below floor " + std::to_string(opt.s_floor);
        return rep;
    }

    // eigenvalue fields of u
    rep.field_mean.assign(r, 0.0);
    rep.field_std.assign(r, 0.0);
    for (int k = 0; k < r; ++k) {
        std::vector<double> v(P);
        for (std::size_t p = 0; p < P; ++p) v[p] = s[p](k) / rep.s_l1;
        const double m = geo.integrate_real(v) / geo.volume();
        for (auto& x : v) x = (x - m) * (x - m);
        rep.field_mean[k] = m;
        rep.field_std[k] = std::sqrt(geo.integrate_real(v) / geo.volume());
        rep.flatness = std::max(rep.flatness, rep.field_std[k]);
    }

    // clusters of adjacent fields
    std::vector<std::vector<int>> clusters{{0}};
    for (int k = 1; k < r; ++k) {
        const double gap = rep.field_mean[k] - rep.field_mean[k - 1];
        const double sd = std::max(rep.field_std[k], rep.field_std[k - 1]);
        if (gap <= opt.cluster_factor * sd || gap <= 1e-12)
            clusters.back().push_back(k);
        else
            clusters.push_back({k});
    }
    double scale = 0.0;
    for (double m : rep.field_mean) scale = std::max(scale, std::abs(m));
    for (const auto& c : clusters) {
        double m = 0.0;
        for (int k : c) m += rep.field_mean[k];
        rep.lambdas.push_back(m / c.size());
        rep.multiplicity.push_back(static_cast<int>(c.size()));
    }
    if (rep.flatness > opt.flat_tol * scale) {
        rep.status = DestabilizerStatus::inconclusive;
        rep.reason = "eigenvalue fields not flat: max std " + std::to_string(rep.flatness);
        return rep;
    }
    if (clusters.size() < 2) {
        rep.status = DestabilizerStatus::inconclusive;
        rep.reason = "eigenvalue fields form a single cluster";
        return rep;
    }
    double min_gap = 1e300;
    for (std::size_t a = 0; a + 1 < rep.lambdas.size(); ++a) min_gap = std::min(min_gap, rep.lambdas[a + 1] - rep.lambdas[a]);
    rep.residual_bound = 10.0 * rep.flatness / min_gap + 1e-8;

    // π_α = W_α W_α^† Ĥ
    for (const auto& c : clusters) {
        MatField pi = like(H);
        for (std::size_t p = 0; p < P; ++p) {
            Mat Wa(r, static_cast<int>(c.size()));
            for (std::size_t j = 0; j < c.size(); ++j) Wa.col(j) = W[p].col(c[j]);
            pi.set(p, Wa * Wa.adjoint() * Hhat.at(p));
        }
        rep.projections.push_back(std::move(pi));
    }

    MatField cum = like(H);
    const int n = geo.n();
    for (std::size_t a = 0; a < clusters.size(); ++a) {
        const MatField& pi = rep.projections[a];
        ProjectionPiece pc;
        const DegreeSlope ds = degree_slope(pi, Hhat, phi, geo, opt.proj_tol);
        pc.rank = ds.rank;
        pc.degree = ds.degree;
        pc.idempotence_residual = ds.idempotence_residual;
        pc.adjoint_residual = ds.adjoint_residual;

        // (Id − π)∂̄π and (Id − π)[φ, π]
        std::vector<MatField> dbar_part, higgs_part;
        for (int j = 0; j < n; ++j) {
            MatField d = mat_derivative(pi, j, true, geo);
            for (std::size_t p = 0; p < P; ++p) d.set(p, (Mat::Identity(r, r) - pi.at(p)) * d.at(p));
            dbar_part.push_back(std::move(d));
            higgs_part.push_back(like(H));
        }
        for (int i = 0; i < n; ++i) {
            MatField c = like(H);
            for (std::size_t p = 0; p < P; ++p) {
                const Mat x = pi.at(p), f = phi.comp[i].at(p);
                c.set(p, (Mat::Identity(r, r) - x) * (f * x - x * f));
            }
            dbar_part.push_back(like(H));
            higgs_part.push_back(std::move(c));
        }
        pc.dbar_residual = l2_norm(dbar_part, Hhat, geo);
        pc.higgs_residual = l2_norm(higgs_part, Hhat, geo);
        rep.pieces.push_back(pc);

        if (a + 1 < clusters.size()) {
            for (std::size_t k = 0; k < cum.e.size(); ++k)
                for (std::size_t p = 0; p < P; ++p) cum.e[k][p] += pi.e[k][p];
            const DegreeSlope fs = degree_slope(cum, Hhat, phi, geo, opt.proj_tol);
            rep.filtration_rank.push_back(fs.rank);
            rep.filtration_degree.push_back(fs.degree);
        }
    }

    const NuValue nv = nu_value(rep.lambdas, rep.filtration_rank, rep.filtration_degree, spec.rank,
                                static_cast<double>(spec.degree()));
    rep.nu = nv.nu;
    rep.nu_deg_form = nv.nu_deg_form;
    rep.rank_identity_residual = nv.rank_identity;
    rep.status = DestabilizerStatus::found;
    rep.reason = rep.nu < 0.0 ? "destabilizing filtration (ν < 0)" : "filtration with ν ≥ 0";
    return rep;
}

std::string to_json(const DestabilizerReport& rep) {
    nlohmann::ordered_json j;
    j["status"] = to_string(rep.status);
    j["reason"] = rep.reason;
    j["s_l1"] = rep.s_l1;
    j["field_mean"] = rep.field_mean;
    j["field_std"] = rep.field_std;
    j["flatness"] = rep.flatness;
    j["lambdas"] = rep.lambdas;
    j["multiplicity"] = rep.multiplicity;
    nlohmann::ordered_json pieces = nlohmann::ordered_json::array();
    for (const auto& p : rep.pieces)
        pieces.push_back({{"rank", p.rank},
                          {"degree", p.degree},
                          {"idempotence_residual", p.idempotence_residual},
                          {"adjoint_residual", p.adjoint_residual},
                          {"dbar_residual", p.dbar_residual},
                          {"higgs_residual", p.higgs_residual}});
    j["projections"] = pieces;
    j["filtration_rank"] = rep.filtration_rank;
    j["filtration_degree"] = rep.filtration_degree;
    j["nu"] = rep.nu;
    j["nu_deg_form"] = rep.nu_deg_form;
    j["rank_identity_residual"] = rep.rank_identity_residual;
    j["residual_bound"] = rep.residual_bound;
    return j.dump(2);
}

}  // namespace hfl
