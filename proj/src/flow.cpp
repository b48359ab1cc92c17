#include "hfl/flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hfl/matfun.hpp"

namespace hfl {

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::converged: return "converged";
        case Outcome::plateau: return "plateau";
        case Outcome::degenerating: return "degenerating";
        case Outcome::budget_exhausted: return "budget_exhausted";
    }
    return "unknown";
}

void FlowConfig::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::parameter, std::string(name) + " must be positive");
    };
    pos(dt_initial, "dt_initial");
    pos(dt_max, "dt_max");
    pos(safety, "safety");
    pos(t_end, "t_end");
    pos(target, "target");
    pos(degeneracy_cap, "degeneracy_cap");
    pos(plateau_tol, "plateau_tol");
    if (plateau_t_min < 0.0) throw Error(ErrorKind::parameter, "plateau_t_min must be nonnegative");
    if (cadence < 1) throw Error(ErrorKind::parameter, "cadence must be at least 1");
    if (max_steps < 1) throw Error(ErrorKind::parameter, "max_steps must be at least 1");
    if (scheme != "etd2" && scheme != "etd1" && scheme != "exp_euler")
        throw Error(ErrorKind::parameter, "unknown scheme '" + scheme + "'");
    for (double c : checkpoints)
        if (!(c > 0.0)) throw Error(ErrorKind::parameter, "checkpoints must be positive");
}

FlowState::FlowState(const HiggsBundleSpec& s, const HiggsField& p, const MetricField& H0, const TorusGeometry& g)
    : H(H0), Hhat(H0), phi(p), spec(s), geo(&g) {
    hhat_logdet.resize(Hhat.points());
    for (std::size_t q = 0; q < Hhat.points(); ++q) hhat_logdet[q] = log_det_pd(Hhat.at(q));
}

const ResidualField& FlowState::residual(double cap) {
    if (!cached) cached = hitchin_simpson_residual(H, phi, spec, *geo, cap);
    return *cached;
}

double adapt_dt(const FlowState& state, const FlowConfig& cfg) {
    const double s = state.cached ? state.cached->sup : 0.0;
    if (s <= 0.0) return cfg.dt_max;
    return std::min(cfg.dt_max, cfg.safety / s);
}

namespace {

double phi1(double z) {
    if (std::abs(z) < 1e-5) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

double phi2(double z) {
    if (std::abs(z) < 1e-3) return 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0;
    return (std::expm1(z) - z) / (z * z);
}

// ETD multipliers on the Laplacian spectrum: hφ₁(hλ), h(φ₁(hλ) − φ₂(hλ)e^{hλ}), hφ₂(hλ).
void ensure_multipliers(FlowState& st, double h) {
    if (st.etd_h == h) return;
    const std::vector<double>& lap = st.geo->laplacian_symbol();
    for (auto& m : st.etd) m.resize(lap.size());
    for (std::size_t p = 0; p < lap.size(); ++p) {
        const double z = h * lap[p];
        st.etd[0][p] = h * phi1(z);
        st.etd[1][p] = h * (phi1(z) - phi2(z) * std::exp(z));
        st.etd[2][p] = h * phi2(z);
    }
    st.etd_h = h;
}

// Periodic entries go to Fourier space; twisted entries stay put and later take the λ = 0 multiplier.
MatField to_spectrum(MatField W, const TorusGeometry& geo) {
    for (int a = 0; a < W.r; ++a)
        for (int b = 0; b < W.r; ++b)
            if (W.charge(a, b) == 0) geo.to_fourier(W(a, b));
    return W;
}

void from_spectrum(MatField& W, const TorusGeometry& geo) {
    for (int a = 0; a < W.r; ++a)
        for (int b = 0; b < W.r; ++b)
            if (W.charge(a, b) == 0) geo.from_fourier(W(a, b));
}

MatField multiply(const MatField& S, const std::vector<double>& m, double m0) {
    MatField out = S;
    for (int a = 0; a < S.r; ++a)
        for (int b = 0; b < S.r; ++b) {
            CVec& v = out(a, b);
            if (S.charge(a, b) == 0) {
                for (std::size_t p = 0; p < v.size(); ++p) v[p] *= m[p];
            } else {
                for (auto& x : v) x *= m0;
            }
        }
    return out;
}

struct Frame {
    std::vector<Mat> R, Ri;  // H^{1/2}, H^{-1/2}
    std::vector<double> r1;  // rank 1: √h only
};

Frame frame_of(const MetricField& H) {
    Frame f;
    if (H.r == 1) {
        const CVec& h = H(0, 0);
        f.r1.resize(h.size());
        for (std::size_t p = 0; p < h.size(); ++p) f.r1[p] = std::sqrt(h[p].real());
        return f;
    }
    f.R.resize(H.points());
    f.Ri.resize(H.points());
    parallel_for(H.points(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            RVec ev;
            Mat V;
            small::herm_eigen(H.at(p), ev, V);
            RVec sq = ev, isq = ev;
            for (int i = 0; i < ev.size(); ++i) {
                sq(i) = std::sqrt(ev(i));
                isq(i) = 1.0 / sq(i);
            }
            f.R[p] = V * sq.asDiagonal() * V.adjoint();
            f.Ri[p] = V * isq.asDiagonal() * V.adjoint();
        }
    });
    return f;
}

// Hermitian representative W = H^{1/2} (−2Φ) H^{-1/2} of the velocity H^{-1}∂H/∂t.
MatField velocity(const MatField& Phi, const Frame& f) {
    MatField W(Phi.r, Phi.flux, Phi.points());
    if (Phi.r == 1) {
        // line bundle: everything commutes
        const CVec& x = Phi(0, 0);
        CVec& w = W(0, 0);
        for (std::size_t p = 0; p < x.size(); ++p) w[p] = -2.0 * x[p].real();
        return W;
    }
    parallel_for(Phi.points(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) W.set(p, herm_part(-2.0 * f.R[p] * Phi.at(p) * f.Ri[p]));
    });
    return W;
}

MetricField exp_update(const Frame& f, const MatField& Y, const MetricField& like) {
    MetricField out(like.r, like.flux, like.points());
    std::vector<long> bad(1, -1);
    if (like.r == 1) {
        const CVec& y = Y(0, 0);
        CVec& o = out(0, 0);
        for (std::size_t p = 0; p < y.size(); ++p) {
            if (!std::isfinite(y[p].real())) {
                bad[0] = static_cast<long>(p);
                break;
            }
            const double r = f.r1[p];
            o[p] = r * r * std::exp(y[p].real());
        }
    } else parallel_for(like.points(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat y = herm_part(Y.at(p));
            if (!y.allFinite()) {
                bad[0] = static_cast<long>(p);
                continue;
            }
            out.set(p, herm_part(f.R[p] * herm_exp(y) * f.R[p]));
        }
    });
    if (bad[0] >= 0) throw Error(ErrorKind::numerical, "non-finite update at grid point " + std::to_string(bad[0]));
    return out;
}

void require_positive(const MetricField& H) {
    if (H.r == 1) {
        const CVec& h = H(0, 0);
        for (std::size_t p = 0; p < h.size(); ++p)
            if (!(h[p].real() > 0.0) || !std::isfinite(h[p].real()))
                throw Error(ErrorKind::numerical, "metric lost positivity at grid point " + std::to_string(p));
        return;
    }
    for (std::size_t p = 0; p < H.points(); ++p) {
        const Mat h = H.at(p);
        Mat L;
        if (!h.allFinite() || !small::chol(h, L))
            throw Error(ErrorKind::numerical, "metric lost positivity at grid point " + std::to_string(p));
    }
}

MatField add(MatField a, const MatField& b) {
    for (std::size_t k = 0; k < a.e.size(); ++k)
        for (std::size_t p = 0; p < a.e[k].size(); ++p) a.e[k][p] += b.e[k][p];
    return a;
}

std::vector<double> logdet_field(const MetricField& H) {
    std::vector<double> out(H.points());
    if (H.r == 1) {
        for (std::size_t p = 0; p < H.points(); ++p) out[p] = std::log(H(0, 0)[p].real());
        return out;
    }
    for (std::size_t p = 0; p < H.points(); ++p) out[p] = log_det_pd(H.at(p));
    return out;
}

}  // namespace

namespace {

double normalize_det(MetricField& H, const std::vector<double>& b, const TorusGeometry& geo) {
    const std::vector<double> a = logdet_field(H);
    std::vector<double> d(a.size());
    for (std::size_t p = 0; p < a.size(); ++p) d[p] = a[p] - b[p];
    const double m = pairwise_sum(d) / static_cast<double>(d.size());
    const double f = std::exp(-m / H.r);
    for (auto& e : H.e)
        for (auto& x : e) x *= f;
    for (std::size_t p = 0; p < d.size(); ++p) d[p] -= m;
    return std::abs(geo.integrate_real(d));
}

}  // namespace

double normalize_det(MetricField& H, const MetricField& Hhat, const TorusGeometry& geo) {
    return normalize_det(H, logdet_field(Hhat), geo);
}

void advance(FlowState& st, double h, const FlowConfig& cfg) {
    if (!(h > 0.0)) throw Error(ErrorKind::parameter, "step size must be positive");
    const TorusGeometry& geo = *st.geo;
    const ResidualField& Rs = st.residual(cfg.degeneracy_cap);
    const Frame f = frame_of(st.H);
    const MatField Ws = velocity(Rs.Phi, f);
    MatField Y;
    if (cfg.scheme == "exp_euler") {
        Y = Ws;
        for (auto& e : Y.e)
            for (auto& x : e) x *= h;
    } else {
        ensure_multipliers(st, h);
        const MatField Sw = to_spectrum(Ws, geo);
        MatField Ya = multiply(Sw, st.etd[0], h);
        from_spectrum(Ya, geo);
        if (cfg.scheme == "etd1") {
            Y = std::move(Ya);
        } else {
            const MetricField Ha = exp_update(f, Ya, st.H);
            const ResidualField Ra = hitchin_simpson_residual(Ha, st.phi, st.spec, geo, cfg.degeneracy_cap);
            const MatField Wa = velocity(Ra.Phi, f);
            Y = add(multiply(Sw, st.etd[1], 0.5 * h), multiply(to_spectrum(Wa, geo), st.etd[2], 0.5 * h));
            from_spectrum(Y, geo);
        }
    }
    MetricField Hn = exp_update(f, Y, st.H);
    require_positive(Hn);
    st.logdet_residual = normalize_det(Hn, st.hhat_logdet, geo);
    st.H = std::move(Hn);
    st.t += h;
    st.dt = h;
    st.cached.reset();
}

void step(FlowState& st, double dt, const FlowConfig& cfg) {
    if (dt > cfg.dt_max) throw Error(ErrorKind::parameter, "dt exceeds dt_max");
    FlowConfig c = cfg;
    c.scheme = "exp_euler";
    advance(st, dt, c);
}

namespace {

// Linear interpolation of a sampled series at time s (clamped).
double interp(const std::vector<double>& t, const std::vector<double>& v, double s) {
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (t[mid] <= s ? lo : hi) = mid;
    }
    const double w = (s - t[lo]) / (t[hi] - t[lo]);
    return (1.0 - w) * v[lo] + w * v[hi];
}

bool any_nonzero(const HiggsField& phi) {
    for (const auto& c : phi.comp)
        for (const auto& e : c.e)
            for (const auto& x : e)
                if (x != cplx(0.0)) return true;
    return false;
}

// Trigonometric interpolant of a coarse periodic field on the grid `fine` (R times finer per axis).
CVec refine(CVec v, const TorusGeometry& geo, const TorusGeometry& fine) {
    const int N = geo.N(), M = fine.N(), d = geo.dims();
    geo.to_fourier(v);
    CVec out(fine.points(), cplx(0.0));
    const double scale = std::pow(static_cast<double>(M) / N, d);
    std::vector<int> m(d), k(d);
    for (std::size_t p = 0; p < v.size(); ++p) {
        std::size_t q = p;
        int nyq = 0;
        for (int a = d - 1; a >= 0; --a) {
            m[a] = static_cast<int>(q % N);
            q /= N;
            if (2 * m[a] == N) ++nyq;
            k[a] = 2 * m[a] < N ? m[a] : m[a] - N;
        }
        // Nyquist coefficients are split evenly between ±N/2
        const cplx c = v[p] * scale / static_cast<double>(1 << nyq);
        for (int s = 0; s < (1 << nyq); ++s) {
            int bit = 0;
            for (int a = 0; a < d; ++a) {
                k[a] = 2 * m[a] < N ? m[a] : m[a] - N;
                if (2 * m[a] == N && ((s >> bit++) & 1)) k[a] = N / 2;
            }
            out[fine.index(k)] += c;
        }
    }
    fine.from_fourier(out);
    return out;
}

// e^{tΔ}|Φ₀| sampled on the flow grid. |Φ₀| has kinks, so its coarse samples alias badly at
// short times; when every charged entry vanishes it is evaluated from the interpolant on a finer
// grid and smoothed there until the modes beyond the coarse band have decayed.
class HeatBound {
public:
    HeatBound(const ResidualField& R, const MetricField& H, const TorusGeometry& geo) : geo_(&geo) {
        hat_ = geo.zeros();
        for (std::size_t p = 0; p < R.op_norm.size(); ++p) hat_.v[p] = R.op_norm[p];
        geo.to_fourier(hat_.v);
        const int factor = geo.n() == 1 ? 4 : 1;
        if (factor == 1 || !periodic(R.Phi) || !periodic(H)) return;

        fine_ = std::make_unique<TorusGeometry>(
            TorusGeometry::make(geo.n(), factor * geo.N(), geo.periods(), geo.g()));
        const int r = R.Phi.r;
        std::vector<CVec> X(r * r), Hf(r * r);
        for (int e = 0; e < r * r; ++e) {
            X[e] = refine(R.Phi.e[e], geo, *fine_);
            if (r > 1) Hf[e] = refine(H.e[e], geo, *fine_);
        }
        CVec abs(fine_->points());
        parallel_for(abs.size(), [&](std::size_t b, std::size_t e) {
            Mat x(r, r), h(r, r);
            for (std::size_t p = b; p < e; ++p) {
                if (r == 1) {
                    abs[p] = std::abs(X[0][p].real());
                    continue;
                }
                for (int i = 0; i < r * r; ++i) {
                    x(i / r, i % r) = X[i][p];
                    h(i / r, i % r) = Hf[i][p];
                }
                abs[p] = hself_eigenvalues(x, h).cwiseAbs().maxCoeff();
            }
        });
        fine_->to_fourier(abs);
        fine_hat_ = std::move(abs);

        // the coarse-band part alone, and the slowest decay rate outside that band
        const int N = geo.N(), M = fine_->N(), d = geo.dims();
        const auto& lap = fine_->laplacian_symbol();
        slowest_ = std::numeric_limits<double>::infinity();
        hat_ = geo.zeros();
        std::vector<int> k(d);
        for (std::size_t p = 0; p < fine_hat_.size(); ++p) {
            std::size_t q = p;
            bool inside = true;
            for (int a = d - 1; a >= 0; --a) {
                const int m = static_cast<int>(q % M);
                q /= M;
                k[a] = 2 * m < M ? m : m - M;
                inside = inside && 2 * std::abs(k[a]) < N;
            }
            if (inside) hat_.v[geo.index(k)] = fine_hat_[p] / std::pow(static_cast<double>(M) / N, d);
            else slowest_ = std::min(slowest_, -lap[p]);
        }
    }

    std::vector<double> at(double t) const {
        std::vector<double> out(geo_->points());
        if (fine_ && t * slowest_ < 40.0) {
            const auto& lap = fine_->laplacian_symbol();
            CVec v = fine_hat_;
            for (std::size_t p = 0; p < v.size(); ++p) v[p] *= std::exp(t * lap[p]);
            fine_->from_fourier(v);
            const int N = geo_->N(), R = fine_->N() / N, d = geo_->dims();
            std::vector<int> m(d);
            for (std::size_t p = 0; p < out.size(); ++p) {
                std::size_t q = p;
                for (int a = d - 1; a >= 0; --a) {
                    m[a] = R * static_cast<int>(q % N);
                    q /= N;
                }
                out[p] = v[fine_->index(m)].real();
            }
            return out;
        }
        const auto& lap = geo_->laplacian_symbol();
        CVec v = hat_.v;
        for (std::size_t p = 0; p < v.size(); ++p) v[p] *= std::exp(t * lap[p]);
        geo_->from_fourier(v);
        for (std::size_t p = 0; p < out.size(); ++p) out[p] = v[p].real();
        return out;
    }

private:
    static bool periodic(const MatField& X) {
        for (int a = 0; a < X.r; ++a)
            for (int b = 0; b < X.r; ++b)
                if (X.charge(a, b) != 0)
                    for (const auto& x : X(a, b))
                        if (x != cplx(0.0)) return false;
        return true;
    }

    const TorusGeometry* geo_;
    Field hat_;
    std::unique_ptr<TorusGeometry> fine_;
    CVec fine_hat_;
    double slowest_ = 0.0;
};

}  // namespace

FlowReport run(const HiggsBundleSpec& spec, const HiggsField& phi, const MetricField& H0, const TorusGeometry& geo,
               const FlowConfig& cfg) {
    cfg.validate();
    spec.validate(geo);
    const HiggsValidation hv = validate_higgs(phi, geo);
    if (!hv.pass)
        throw Error(ErrorKind::parameter, "Higgs field fails validation: dbar residual " +
                                              std::to_string(hv.dbar_residual) + ", commutator residual " +
                                              std::to_string(hv.commutator_residual));
    check_metric(H0);

    FlowState st(spec, phi, H0, geo);
    FlowReport rep;
    std::optional<DonaldsonFunctional> mu;
    if (cfg.donaldson) mu.emplace(H0, phi, geo, cfg.degeneracy_cap);
    const bool has_phi = any_nonzero(phi);

    std::vector<double> cps = cfg.checkpoints;
    std::sort(cps.begin(), cps.end());
    std::size_t next_cp = 0;
    while (next_cp < cps.size() && cps[next_cp] <= 0.0) ++next_cp;

    Field tr0;  // held in Fourier space
    std::optional<HeatBound> abs0;
    const std::vector<double>& lap = geo.laplacian_symbol();
    // e^{tΔ} applied to a Fourier-space field
    auto heat_from = [&](const Field& hat, double t) {
        Field out = hat;
        for (std::size_t p = 0; p < lap.size(); ++p) out.v[p] *= std::exp(t * lap[p]);
        geo.from_fourier(out.v);
        return out;
    };
    double sup0 = 0.0, l10 = 0.0;
    double prev_sup = 0.0, prev_l1 = 0.0, min_higgs = std::numeric_limits<double>::infinity();
    double last_logdet = 0.0;
    std::vector<double> hist_t, hist_sup;
    bool first = true;

    auto record = [&](const ResidualField& R, const MetricStats& ms) {
        MonitorSample s;
        s.t = st.t;
        s.sup_phi = R.sup;
        s.l1_phi = R.l1;
        s.l2_phi_sq = R.l2_sq;
        s.donaldson = mu ? (*mu)(st.H) : 0.0;
        s.sup_higgs_norm = has_phi ? endo_norms(phi, st.H, geo).sup : 0.0;
        s.logdet_residual = last_logdet;
        s.min_eig_H = ms.min_eig;
        s.cond_H = ms.max_cond;
        rep.samples.push_back(s);

        Field tr = geo.zeros();
        for (std::size_t p = 0; p < tr.v.size(); ++p) tr.v[p] = R.trace[p];
        const Field a = heat_from(tr0, st.t);
        double d = 0.0;
        for (std::size_t p = 0; p < tr.v.size(); ++p) d = std::max(d, std::abs(tr.v[p] - a.v[p]));
        rep.trace_heat_defect = std::max(rep.trace_heat_defect, d);
        double bound = 0.0;
        for (double x : abs0->at(st.t)) bound = std::max(bound, x);
        const double margin = bound - R.sup;
        rep.heat_domination_margin = std::min(rep.heat_domination_margin, margin);

        if (rep.samples.size() > 1) {
            if (R.sup > prev_sup + 1e-6 * sup0) ++rep.sup_violations;
            if (R.l1 > prev_l1 + 1e-6 * l10) ++rep.l1_violations;
        }
        if (has_phi) {
            if (s.sup_higgs_norm > min_higgs * (1.0 + 1e-6)) ++rep.higgs_norm_violations;
            min_higgs = std::min(min_higgs, s.sup_higgs_norm);
        }
        prev_sup = R.sup;
        prev_l1 = R.l1;
    };

    while (true) {
        const MetricStats ms = metric_stats(st.H);
        if (ms.max_cond > cfg.degeneracy_cap) {
            rep.outcome = Outcome::degenerating;
            rep.reason = "metric condition number " + std::to_string(ms.max_cond) + " exceeds cap";
            break;
        }
        const ResidualField* Rp = nullptr;
        try {
            Rp = &st.residual(cfg.degeneracy_cap);
        } catch (const DegeneracyError& e) {
            rep.outcome = Outcome::degenerating;
            rep.reason = e.what();
            break;
        }
        const ResidualField& R = *Rp;
        if (first) {
            tr0 = geo.zeros();
            for (std::size_t p = 0; p < R.trace.size(); ++p) tr0.v[p] = R.trace[p];
            geo.to_fourier(tr0.v);
            abs0.emplace(R, st.H, geo);
            sup0 = R.sup;
            l10 = R.l1;
            prev_sup = sup0;
            prev_l1 = l10;
            first = false;
        }
        hist_t.push_back(st.t);
        hist_sup.push_back(R.sup);

        bool at_cp = false;
        while (next_cp < cps.size() && std::abs(st.t - cps[next_cp]) <= 1e-12 * std::max(1.0, cps[next_cp])) {
            at_cp = true;
            rep.snapshots.emplace_back(cps[next_cp], st.H);
            ++next_cp;
        }

        bool stop = true;
        if (R.sup < cfg.target) {
            rep.outcome = Outcome::converged;
            rep.reason = "sup|Phi| below target";
        } else if (st.t >= cfg.plateau_t_min && st.t > 0.0 &&
                   R.sup >= (1.0 - cfg.plateau_tol) * interp(hist_t, hist_sup, 0.5 * st.t)) {
            rep.outcome = Outcome::plateau;
            rep.reason = "sup|Phi| stalled between t/2 and t";
        } else if (st.t >= cfg.t_end * (1.0 - 1e-14) || rep.steps >= cfg.max_steps) {
            rep.outcome = Outcome::budget_exhausted;
            rep.reason = rep.steps >= cfg.max_steps ? "step budget exhausted" : "reached t_end";
        } else {
            stop = false;
        }
        if (stop || at_cp || rep.steps % cfg.cadence == 0) record(R, ms);
        if (stop) break;

        double dt = adapt_dt(st, cfg);
        if (rep.steps == 0) dt = std::min(dt, cfg.dt_initial);
        double land = cfg.t_end;
        if (next_cp < cps.size()) land = std::min(land, cps[next_cp]);
        bool clipped = false;
        if (st.t + dt >= land * (1.0 - 1e-14)) {
            dt = land - st.t;
            clipped = true;
        }
        try {
            advance(st, dt, cfg);
        } catch (const DegeneracyError& e) {
            rep.outcome = Outcome::degenerating;
            rep.reason = e.what();
            break;
        }
        if (clipped) st.t = land;
        last_logdet = st.logdet_residual;
        rep.max_logdet_residual = std::max(rep.max_logdet_residual, last_logdet);
        ++rep.steps;
    }
    rep.t_final = st.t;
    rep.H_final = st.H;
    if (st.cached) rep.Phi_final = st.cached->Phi;
    return rep;
}

std::string monitor_csv(const std::vector<MonitorSample>& samples) {
    std::ostringstream os;
    os << "t,sup_phi,l1_phi,l2_phi_sq,donaldson,sup_higgs_norm,logdet_residual,min_eig_H,cond_H\n";
    char buf[512];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t, s.sup_phi,
                      s.l1_phi, s.l2_phi_sq, s.donaldson, s.sup_higgs_norm, s.logdet_residual, s.min_eig_H,
                      s.cond_H);
        os << buf;
    }
    return os.str();
}

void write_monitor_csv(const std::vector<MonitorSample>& samples, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::config, "cannot write " + path);
    f << monitor_csv(samples);
}

}  // namespace hfl
