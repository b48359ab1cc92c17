#pragma once

#include <cmath>
#include <cstdint>

#include "hfl/fields.hpp"
#include "hfl/geometry.hpp"

namespace testutil {

using hfl::cplx;

// SplitMix64; small, portable, and enough for property-test generators.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (s += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    cplx complex(double r = 1.0) { return {uniform(-r, r), uniform(-r, r)}; }
};

// Random trigonometric polynomial with wavenumbers |m_a| ≤ K on every real axis.
inline hfl::Field random_field(const hfl::TorusGeometry& geo, int K, Rng& rng, bool real = false,
                               double amp = 1.0) {
    const int D = geo.dims();
    std::vector<std::vector<int>> modes;
    std::vector<int> m(D, -K);
    while (true) {
        modes.push_back(m);
        int a = D - 1;
        while (a >= 0 && m[a] == K) m[a--] = -K;
        if (a < 0) break;
        ++m[a];
    }
    std::vector<cplx> coef(modes.size());
    for (auto& c : coef) c = rng.complex(amp / static_cast<double>(modes.size()));
    hfl::Field f = geo.zeros();
    for (std::size_t p = 0; p < geo.points(); ++p) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            double ph = 0.0;
            for (int a = 0; a < D; ++a) ph += 2.0 * hfl::kPi * modes[k][a] * geo.coord(p, a) / geo.periods()[a];
            s += coef[k] * std::polar(1.0, ph);
        }
        f.v[p] = real ? cplx(s.real(), 0.0) : s;
    }
    return f;
}

inline double max_diff(const hfl::CVec& a, const hfl::CVec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline Eigen::MatrixXcd random_hermitian_pd(int n, Rng& rng, double spread = 1.0) {
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.complex(spread);
    return A * A.adjoint() + Eigen::MatrixXcd::Identity(n, n) * 0.5;
}

inline Eigen::MatrixXcd random_unitary(int n, Rng& rng) {
    Eigen::MatrixXcd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) A(i, j) = rng.complex();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
    return qr.householderQ();
}

// exp of a Hermitian matrix
inline hfl::Mat hexp(const hfl::Mat& X) {
    Eigen::SelfAdjointEigenSolver<hfl::Mat> es(X);
    return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() * es.eigenvectors().adjoint();
}

// H = exp(Σ random smooth Hermitian), entries only between equal-flux summands.
inline hfl::MetricField perturbed_metric(const hfl::TorusGeometry& geo, const std::vector<int>& flux, Rng& rng,
                                         double amp, int K = 2) {
    const int r = static_cast<int>(flux.size());
    std::vector<hfl::Field> ent(r * r, geo.zeros());
    for (int a = 0; a < r; ++a)
        for (int b = a; b < r; ++b)
            if (flux[a] == flux[b]) ent[a * r + b] = random_field(geo, K, rng, a == b, amp);
    hfl::MetricField H(r, flux, geo.points());
    for (std::size_t p = 0; p < geo.points(); ++p) {
        hfl::Mat X(r, r);
        for (int a = 0; a < r; ++a)
            for (int b = a; b < r; ++b) {
                X(a, b) = ent[a * r + b].v[p];
                X(b, a) = std::conj(X(a, b));
            }
        X = 0.5 * (X + X.adjoint()).eval();
        H.set(p, hexp(X));
    }
    return H;
}

inline double max_mat_diff(const hfl::MatField& A, const hfl::MatField& B) {
    double d = 0.0;
    for (std::size_t k = 0; k < A.e.size(); ++k) d = std::max(d, max_diff(A.e[k], B.e[k]));
    return d;
}

inline hfl::HiggsBundleSpec trivial(int r) {
    hfl::HiggsBundleSpec s;
    s.rank = r;
    s.fluxes.assign(r, 0);
    return s;
}

}  // namespace testutil
