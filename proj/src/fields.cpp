#include "hfl/fields.hpp"

#include <cmath>
#include <limits>

#include "hfl/small.hpp"

namespace hfl {

MatField::MatField(int rank, std::vector<int> fluxes, std::size_t points)
    : r(rank), flux(std::move(fluxes)), e(static_cast<std::size_t>(rank * rank), CVec(points, cplx(0.0))) {
    if (static_cast<int>(flux.size()) != r) throw Error(ErrorKind::shape, "flux list length must equal rank");
}

MatField MatField::identity(int rank, std::vector<int> fluxes, std::size_t points) {
    MatField m(rank, std::move(fluxes), points);
    for (int a = 0; a < rank; ++a) std::fill(m(a, a).begin(), m(a, a).end(), cplx(1.0));
    return m;
}

MatField MatField::constant(const Mat& c, std::vector<int> fluxes, std::size_t points) {
    MatField m(static_cast<int>(c.rows()), std::move(fluxes), points);
    for (int a = 0; a < m.r; ++a)
        for (int b = 0; b < m.r; ++b) {
            if (c(a, b) != cplx(0.0) && m.charge(a, b) != 0)
                throw Error(ErrorKind::twist, "constant entry between summands of different flux");
            std::fill(m(a, b).begin(), m(a, b).end(), c(a, b));
        }
    return m;
}

int HiggsBundleSpec::degree() const {
    int d = 0;
    for (int f : fluxes) d += f;
    return d;
}

double HiggsBundleSpec::lambda(const TorusGeometry& geo) const { return 2.0 * kPi * slope() / geo.volume(); }

void HiggsBundleSpec::validate(const TorusGeometry& geo) const {
    if (rank < 1 || rank > kMaxRank)
        throw Error(ErrorKind::unsupported, "rank must be between 1 and " + std::to_string(kMaxRank));
    if (static_cast<int>(fluxes.size()) != rank) throw Error(ErrorKind::shape, "flux list length must equal rank");
    if (geo.n() == 2)
        for (int f : fluxes)
            if (f != 0) throw Error(ErrorKind::unsupported, "fluxed summands require complex dimension 1");
    for (const auto& h : higgs) {
        if (h.component < 0 || h.component >= geo.n())
            throw Error(ErrorKind::parameter, "Higgs component index out of range");
        if (h.row < 0 || h.row >= rank || h.col < 0 || h.col >= rank)
            throw Error(ErrorKind::parameter, "Higgs entry index out of range");
        const int q = fluxes[h.row] - fluxes[h.col];
        if (h.theta_index < 0 && q != 0)
            throw Error(ErrorKind::unsupported, "constant Higgs entry couples summands with different flux");
        if (h.theta_index >= 0 && (q < 1 || h.theta_index >= q))
            throw Error(ErrorKind::unsupported, "theta Higgs entry needs 0 <= index < d_row - d_col");
    }
}

Field theta_section(int d, int k, const TorusGeometry& geo) {
    if (geo.n() != 1) throw Error(ErrorKind::unsupported, "theta sections exist only for n = 1");
    if (d < 1 || k < 0 || k >= d) throw Error(ErrorKind::parameter, "theta section needs d >= 1 and 0 <= k < d");
    const double Lx = geo.periods()[0], Ly = geo.periods()[1];
    const double a = kPi * d / (Lx * Ly);
    Field s = geo.zeros(d);
    for (std::size_t p = 0; p < geo.points(); ++p) {
        const double x = geo.coord(p, 0), y = geo.coord(p, 1);
        cplx acc = 0.0;
        for (int m = -10; m <= 10; ++m) {
            const double c = Lx * (m + static_cast<double>(k) / d);
            acc += std::exp(-a * (x - c) * (x - c)) * std::polar(1.0, 2.0 * kPi * (d * m + k) * y / Ly);
        }
        s.v[p] = acc;
    }
    return s;
}

HiggsField zero_higgs(const HiggsBundleSpec& spec, const TorusGeometry& geo) {
    HiggsField phi;
    for (int i = 0; i < geo.n(); ++i) phi.comp.emplace_back(spec.rank, spec.fluxes, geo.points());
    return phi;
}

HiggsField make_higgs(const HiggsBundleSpec& spec, const TorusGeometry& geo) {
    spec.validate(geo);
    HiggsField phi = zero_higgs(spec, geo);
    for (const auto& h : spec.higgs) {
        CVec& dst = phi.comp[h.component](h.row, h.col);
        const cplx c = h.value * spec.amplitude;
        if (h.theta_index < 0) {
            for (auto& x : dst) x += c;
        } else {
            const Field s = theta_section(spec.fluxes[h.row] - spec.fluxes[h.col], h.theta_index, geo);
            for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += c * s.v[p];
        }
    }
    return phi;
}

MetricField make_line_bundle_metric(int flux, const TorusGeometry& geo) {
    if (geo.n() == 2 && flux != 0)
        throw Error(ErrorKind::unsupported, "fluxed line bundles are supported only for n = 1");
    return MatField::identity(1, {flux}, geo.points());
}

MetricField reference_metric(const HiggsBundleSpec& spec, const TorusGeometry& geo) {
    spec.validate(geo);
    return MatField::identity(spec.rank, spec.fluxes, geo.points());
}

void check_metric(const MetricField& H, double herm_tol) {
    for (std::size_t p = 0; p < H.points(); ++p) {
        const Mat h = H.at(p);
        if (!h.allFinite()) throw Error(ErrorKind::metric, "non-finite metric at grid point " + std::to_string(p));
        if ((h - h.adjoint()).norm() > herm_tol * (1.0 + h.norm()))
            throw Error(ErrorKind::metric, "metric not Hermitian at grid point " + std::to_string(p));
        Mat L;
        if (!small::chol(h, L))
            throw Error(ErrorKind::metric, "metric not positive definite at grid point " + std::to_string(p));
    }
}

AntiHiggsField adjoint_higgs(const HiggsField& phi, const MetricField& H) {
    AntiHiggsField out;
    const std::size_t P = H.points();
    for (const auto& c : phi.comp) {
        if (c.r != H.r || c.points() != P) throw Error(ErrorKind::shape, "Higgs field and metric shapes differ");
        out.comp.emplace_back(c.r, c.flux, P);
    }
    std::vector<int> bad(1, -1);
    parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            const Mat h = H.at(p);
            Mat L;
            if (!small::chol(h, L)) {
                bad[0] = static_cast<int>(p);
                continue;
            }
            for (std::size_t i = 0; i < phi.comp.size(); ++i) {
                const Mat a = phi.comp[i].at(p);
                out.comp[i].set(p, small::chol_solve(L, a.adjoint() * h));
            }
        }
    });
    if (bad[0] >= 0) throw Error(ErrorKind::metric, "metric not positive definite at grid point " + std::to_string(bad[0]));
    return out;
}

HiggsValidation validate_higgs(const HiggsField& phi, const TorusGeometry& geo, double tol_rel) {
    HiggsValidation v;
    const int n = static_cast<int>(phi.comp.size());
    if (n != geo.n()) throw Error(ErrorKind::shape, "Higgs field needs one component per complex dimension");
    for (const auto& c : phi.comp)
        for (std::size_t p = 0; p < c.points(); ++p) v.scale = std::max(v.scale, c.at(p).norm());
    CVec d;
    for (const auto& c : phi.comp)
        for (int a = 0; a < c.r; ++a)
            for (int b = 0; b < c.r; ++b)
                for (int j = 0; j < n; ++j) {
                    geo.derivative(c(a, b), j, true, c.charge(a, b), d);
                    v.dbar_residual = std::max(v.dbar_residual, sup_abs(d));
                }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (std::size_t p = 0; p < phi.comp[i].points(); ++p) {
                const Mat a = phi.comp[i].at(p), b = phi.comp[j].at(p);
                v.commutator_residual = std::max(v.commutator_residual, (a * b - b * a).norm());
            }
    v.tol_hol = tol_rel * v.scale;
    v.tol_int = tol_rel * v.scale * v.scale;
    v.pass = v.dbar_residual <= v.tol_hol && v.commutator_residual <= v.tol_int;
    return v;
}

std::vector<double> higgs_norm_sq(const HiggsField& phi, const MetricField& H, const TorusGeometry& geo) {
    const AntiHiggsField star = adjoint_higgs(phi, H);
    const int n = geo.n();
    const std::size_t P = H.points();
    std::vector<double> out(P, 0.0);
    parallel_for(P, [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) {
            cplx s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const cplx w = geo.ginv()(j, i);
                    if (w == cplx(0.0)) continue;
                    s += w * (phi.comp[i].at(p) * star.comp[j].at(p)).trace();
                }
            out[p] = geo.lambda_factor() * s.real();
        }
    });
    return out;
}

EndoNorms endo_norms(const HiggsField& phi, const MetricField& H, const TorusGeometry& geo, double b) {
    if (b < 1.0) throw Error(ErrorKind::parameter, "log-moment exponent must be at least 1");
    const std::vector<double> sq = higgs_norm_sq(phi, H, geo);
    EndoNorms out;
    std::vector<double> lm(sq.size());
    double mx = 0.0;
    for (std::size_t p = 0; p < sq.size(); ++p) {
        const double v = std::max(sq[p], 0.0);
        mx = std::max(mx, v);
        lm[p] = std::pow(std::log(v + std::exp(1.0)), b);
    }
    out.sup = std::sqrt(mx);
    std::vector<double> pos(sq.size());
    for (std::size_t p = 0; p < sq.size(); ++p) pos[p] = std::max(sq[p], 0.0);
    out.l2_sq = geo.integrate_real(pos);
    out.log_moment = geo.integrate_real(lm);
    return out;
}

MetricStats metric_stats(const MetricField& H) {
    MetricStats s;
    s.min_eig = std::numeric_limits<double>::infinity();
    if (H.r == 1) {
        for (const auto& x : H(0, 0)) s.min_eig = std::min(s.min_eig, x.real());
        if (H.points() > 0) s.max_cond = s.min_eig > 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
        return s;
    }
    for (std::size_t p = 0; p < H.points(); ++p) {
        RVec w;
        Mat V;
        small::herm_eigen(H.at(p), w, V);
        const double lo = w(0), hi = w(H.r - 1);
        s.min_eig = std::min(s.min_eig, lo);
        const double c = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (c > s.max_cond) {
            s.max_cond = c;
            s.worst_point = p;
        }
    }
    if (H.points() > 0 && s.max_cond == 0.0) s.max_cond = 1.0;
    return s;
}

namespace {

void require_block_unitary(const Mat& U, const std::vector<int>& flux) {
    if ((U.adjoint() * U - Mat::Identity(U.rows(), U.cols())).norm() > 1e-12)
        throw Error(ErrorKind::parameter, "conjugation matrix is not unitary");
    for (int a = 0; a < U.rows(); ++a)
        for (int b = 0; b < U.cols(); ++b)
            if (flux[a] != flux[b] && std::abs(U(a, b)) > 0.0)
                throw Error(ErrorKind::unsupported, "conjugation mixes summands of different flux");
}

}  // namespace

MetricField conjugate_metric(const MetricField& H, const Mat& U) {
    require_block_unitary(U, H.flux);
    MetricField out(H.r, H.flux, H.points());
    for (std::size_t p = 0; p < H.points(); ++p) out.set(p, U.adjoint() * H.at(p) * U);
    return out;
}

HiggsField conjugate_higgs(const HiggsField& phi, const Mat& U) {
    HiggsField out;
    const Mat Ui = U.adjoint();
    for (const auto& c : phi.comp) {
        require_block_unitary(U, c.flux);
        MatField m(c.r, c.flux, c.points());
        for (std::size_t p = 0; p < c.points(); ++p) m.set(p, Ui * c.at(p) * U);
        out.comp.push_back(std::move(m));
    }
    return out;
}

}  // namespace hfl
