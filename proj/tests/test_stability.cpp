#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "hfl/flow.hpp"
#include "hfl/stability.hpp"
#include "test_util.hpp"

using namespace hfl;
using testutil::Rng;
using testutil::trivial;

namespace {

HiggsBundleSpec split(int a, int b) {
    HiggsBundleSpec s;
    s.rank = 2;
    s.fluxes = {a, b};
    return s;
}

HiggsBundleSpec nilpotent_spec(double e) {
    HiggsBundleSpec s = trivial(2);
    s.higgs = {HiggsEntry{0, 0, 1, cplx(e, 0.0)}};
    return s;
}

MetricField diag_field(const std::vector<int>& flux, const TorusGeometry& geo, double a, double b) {
    MetricField H(2, flux, geo.points());
    for (std::size_t p = 0; p < geo.points(); ++p) {
        H(0, 0)[p] = a;
        H(1, 1)[p] = b;
    }
    return H;
}

double op_distance(const MatField& A, const MatField& B) {
    double d = 0.0;
    for (std::size_t p = 0; p < A.points(); ++p) {
        Eigen::JacobiSVD<Mat> svd(A.at(p) - B.at(p));
        d = std::max(d, svd.singularValues()(0));
    }
    return d;
}

// Random catalog spec: arrows only go from later to earlier summands in a hidden order.
HiggsBundleSpec random_catalog(Rng& rng) {
    HiggsBundleSpec s;
    s.rank = rng.integer(1, 4);
    s.fluxes.resize(s.rank);
    for (auto& f : s.fluxes) f = rng.integer(-2, 2);
    for (int a = 0; a < s.rank; ++a)
        for (int b = 0; b < s.rank; ++b) {
            if (a >= b || rng.uniform() < 0.5) continue;
            const int q = s.fluxes[a] - s.fluxes[b];
            if (q == 0)
                s.higgs.push_back(HiggsEntry{0, a, b, rng.complex() + cplx(2.0, 0.0)});
            else if (q > 0)
                s.higgs.push_back(HiggsEntry{0, a, b, cplx(1.0, 0.0), 0});
        }
    return s;
}

}  // namespace

TEST_CASE("classify examples") {
    for (int d : {-3, 0, 2}) {
        HiggsBundleSpec s = trivial(1);
        s.fluxes = {d};
        CHECK(classify(s).kind == Stability::stable);
        CHECK(!classify(s).witness);
    }

    const ScenarioClass nil = classify(nilpotent_spec(1.0));
    CHECK(nil.kind == Stability::strictly_semistable);
    REQUIRE(nil.witness);
    CHECK(nil.witness->summands == std::vector<int>{0});
    CHECK(nil.witness->slope == Rational(0));
    CHECK(nil.slope == Rational(0));

    const ScenarioClass sp = classify(split(1, -1));
    CHECK(sp.kind == Stability::unstable);
    REQUIRE(sp.witness);
    CHECK(sp.witness->summands == std::vector<int>{0});
    CHECK(sp.witness->slope == Rational(1));
    CHECK(sp.witness->degree == 1);

    CHECK(classify(trivial(2)).kind == Stability::polystable);
    CHECK(classify(split(1, 1)).kind == Stability::polystable);

    // φ: L(−1) → L(1) through a theta section keeps L(1) invariant
    HiggsBundleSpec up = split(1, -1);
    up.higgs = {HiggsEntry{0, 0, 1, cplx(1.0, 0.0), 0}};
    CHECK(classify(up).kind == Stability::unstable);

    // rank 3: e₂ → e₁ only, e₃ separate; ker-type witness
    HiggsBundleSpec r3 = trivial(3);
    r3.higgs = {HiggsEntry{0, 0, 1, cplx(0.5, 0.0)}};
    CHECK(classify(r3).kind == Stability::strictly_semistable);

    // mixed fluxes, fractional slope
    HiggsBundleSpec frac;
    frac.rank = 3;
    frac.fluxes = {1, 1, -1};
    const ScenarioClass fc = classify(frac);
    CHECK(fc.kind == Stability::unstable);
    CHECK(fc.slope == Rational(1, 3));
    CHECK(fc.witness->slope == Rational(1));
    CHECK(fc.witness->rank == 2);  // maximal destabilizing: L(1)⊕L(1)
}

TEST_CASE("classify rejects non-catalog specs") {
    auto expect_unsupported = [](const HiggsBundleSpec& s) {
        try {
            classify(s);
            FAIL("expected unsupported");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::unsupported);
        }
    };
    HiggsBundleSpec a = split(1, -1);
    a.higgs = {HiggsEntry{0, 0, 1, cplx(1.0, 0.0)}};  // constant across a flux mismatch
    expect_unsupported(a);
    HiggsBundleSpec b = split(1, -1);
    b.higgs = {HiggsEntry{0, 1, 0, cplx(1.0, 0.0), 0}};  // negative charge
    expect_unsupported(b);
    HiggsBundleSpec c = trivial(2);
    c.higgs = {HiggsEntry{0, 0, 1, 1.0}, HiggsEntry{0, 1, 0, 1.0}};  // cycle
    expect_unsupported(c);
    HiggsBundleSpec d = trivial(2);
    d.higgs = {HiggsEntry{0, 0, 0, 1.0}, HiggsEntry{0, 0, 1, 1.0}};  // diagonal and off-diagonal mixed
    expect_unsupported(d);
    HiggsBundleSpec e = trivial(2);
    e.higgs = {HiggsEntry{0, 0, 5, 1.0}};
    CHECK_THROWS_AS(classify(e), Error);
}

TEST_CASE("property: classify is invariant under permutation and phase changes") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const HiggsBundleSpec s = random_catalog(rng);
        std::vector<int> perm(s.rank);
        std::iota(perm.begin(), perm.end(), 0);
        for (int i = s.rank - 1; i > 0; --i) std::swap(perm[i], perm[rng.integer(0, i)]);
        HiggsBundleSpec t = s;
        for (int k = 0; k < s.rank; ++k) t.fluxes[perm[k]] = s.fluxes[k];
        for (auto& h : t.higgs) {
            h.row = perm[h.row];
            h.col = perm[h.col];
            h.value *= std::polar(1.0, rng.uniform(0.0, 2 * kPi));
        }
        const ScenarioClass A = classify(s), B = classify(t);
        CAPTURE(trial);
        CHECK(A.kind == B.kind);
        CHECK(A.slope == B.slope);
        CHECK(A.witness.has_value() == B.witness.has_value());
        if (A.witness && B.witness) {
            CHECK(A.witness->slope == B.witness->slope);
            if (A.kind == Stability::unstable) CHECK(A.witness->rank == B.witness->rank);
        }
        // the witness, when present, is invariant and has the expected slope relation
        if (A.witness) {
            if (A.kind == Stability::unstable)
                CHECK(A.witness->slope > A.slope);
            else
                CHECK(A.witness->slope == A.slope);
        }
    }
}

TEST_CASE("nu invariant examples") {
    const HiggsBundleSpec E = trivial(2);
    CHECK(nu_invariant({Rational(-1, 2), Rational(1, 2)}, {1}, {1}, E) == Rational(-1));
    CHECK(nu_invariant({Rational(-1, 2), Rational(1, 2)}, {1}, {0}, E) == Rational(0));
    CHECK(nu_invariant({Rational(-1, 2), Rational(1, 2)}, {1}, {-2}, E) == Rational(2));
    // rank identity: λ₂·2 = (λ₂ − λ₁)·1 forces λ₁ = −λ₂
    try {
        nu_invariant({Rational(-1, 3), Rational(1, 2)}, {1}, {1}, E);
        FAIL("expected filtration error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::filtration);
    }
    CHECK_THROWS_AS(nu_invariant({Rational(1, 2), Rational(-1, 2)}, {1}, {1}, E), Error);
    CHECK_THROWS_AS(nu_invariant({Rational(-1, 2), Rational(1, 2)}, {2}, {1}, E), Error);
    CHECK_THROWS_AS(nu_invariant({Rational(-1, 2), Rational(1, 2)}, {}, {}, E), Error);
}

TEST_CASE("property: nu equals the graded-piece sum and the floating form") {
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        HiggsBundleSpec E;
        E.rank = rng.integer(2, 4);
        E.fluxes.resize(E.rank);
        for (auto& f : E.fluxes) f = rng.integer(-3, 3);
        const int l = rng.integer(2, E.rank);
        // multiplicities of the graded pieces
        std::vector<int> mult(l, 1);
        for (int k = l; k < E.rank; ++k) ++mult[rng.integer(0, l - 1)];
        // strictly increasing λ with Σ m_α λ_α = 0
        std::vector<Rational> lam(l);
        Rational acc(rng.integer(-5, 5), rng.integer(1, 4));
        for (int a = 0; a < l; ++a) {
            lam[a] = acc;
            acc += Rational(rng.integer(1, 6), rng.integer(1, 5));
        }
        Rational mean(0);
        for (int a = 0; a < l; ++a) mean += lam[a] * Rational(mult[a]);
        mean /= Rational(E.rank);
        for (auto& x : lam) x -= mean;
        // graded degrees summing to deg E
        std::vector<long long> gdeg(l);
        long long rest = E.degree();
        for (int a = 0; a + 1 < l; ++a) {
            gdeg[a] = rng.integer(-4, 4);
            rest -= gdeg[a];
        }
        gdeg[l - 1] = rest;
        std::vector<int> ranks;
        std::vector<long long> degs;
        int rc = 0;
        long long dc = 0;
        for (int a = 0; a + 1 < l; ++a) {
            rc += mult[a];
            dc += gdeg[a];
            ranks.push_back(rc);
            degs.push_back(dc);
        }
        Rational oracle(0);
        for (int a = 0; a < l; ++a) oracle += lam[a] * Rational(gdeg[a]);
        const Rational nu = nu_invariant(lam, ranks, degs, E);
        CAPTURE(trial);
        CHECK(nu == oracle);

        std::vector<double> dl, dd;
        for (const auto& x : lam) dl.push_back(boost::rational_cast<double>(x));
        for (auto x : degs) dd.push_back(static_cast<double>(x));
        const NuValue v = nu_value(dl, ranks, dd, E.rank, static_cast<double>(E.degree()));
        CHECK(v.nu == doctest::Approx(boost::rational_cast<double>(nu)).epsilon(1e-12).scale(1.0));
        CHECK(v.nu_deg_form == doctest::Approx(v.nu).epsilon(1e-12).scale(1.0));
        CHECK(std::abs(v.rank_identity) < 1e-12);
    }
}

TEST_CASE("destabilizer: diagonal split metric") {
    auto geo = TorusGeometry::make(1, 16);
    const HiggsBundleSpec s = split(1, -1);
    const MetricField Hhat = reference_metric(s, geo);
    const MetricField H = diag_field(s.fluxes, geo, std::exp(-3.0), std::exp(3.0));
    const DestabilizerReport rep = extract_destabilizer(H, Hhat, zero_higgs(s, geo), s, geo);
    REQUIRE(rep.status == DestabilizerStatus::found);
    REQUIRE(rep.lambdas.size() == 2);
    CHECK(rep.lambdas[0] == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(rep.lambdas[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.s_l1 == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(op_distance(rep.projections[0], summand_projection({0}, Hhat)) < 1e-12);
    CHECK(rep.pieces[0].rank == 1);
    CHECK(rep.pieces[0].degree == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.filtration_degree[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.nu == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(rep.nu_deg_form == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(std::abs(rep.rank_identity_residual) < 1e-12);
    CHECK(rep.pieces[0].dbar_residual <= rep.residual_bound);
    CHECK(rep.pieces[0].higgs_residual <= rep.residual_bound);
    const std::string js = to_json(rep);
    CHECK(js.find("\"status\": \"found\"") != std::string::npos);
    CHECK(js.find("\"nu\"") != std::string::npos);
}

TEST_CASE("destabilizer: metric close to the background has none") {
    auto geo = TorusGeometry::make(1, 16);
    const HiggsBundleSpec s = trivial(1);
    MetricField H = reference_metric(s, geo);
    for (auto& x : H(0, 0)) x *= 1.0 + 1e-4;
    const DestabilizerReport rep = extract_destabilizer(H, reference_metric(s, geo), zero_higgs(s, geo), s, geo);
    CHECK(rep.status == DestabilizerStatus::no_destabilizer);
    CHECK(rep.projections.empty());
}

TEST_CASE("destabilizer: spatially varying eigenvalues are inconclusive") {
    auto geo = TorusGeometry::make(1, 16);
    const HiggsBundleSpec s = trivial(2);
    MetricField H(2, {0, 0}, geo.points());
    for (std::size_t p = 0; p < geo.points(); ++p) {
        const double f = 3.0 * std::cos(2 * kPi * geo.coord(p, 0));
        H(0, 0)[p] = std::exp(f);
        H(1, 1)[p] = std::exp(-f);
    }
    const DestabilizerReport rep = extract_destabilizer(H, reference_metric(s, geo), zero_higgs(s, geo), s, geo);
    CHECK(rep.status == DestabilizerStatus::inconclusive);
    CHECK(rep.projections.empty());
}

TEST_CASE("destabilizer: nilpotent flow end state") {
    auto geo = TorusGeometry::make(1, 4);
    const HiggsBundleSpec s = nilpotent_spec(1.0);
    FlowConfig c;
    c.safety = 2e-3;
    c.dt_max = 1e12;
    c.t_end = 50.0;
    c.target = 1e-30;
    c.plateau_t_min = 1e30;
    c.donaldson = false;
    const HiggsField phi = make_higgs(s, geo);
    const MetricField Hhat = reference_metric(s, geo);
    const FlowReport fr = run(s, phi, Hhat, geo, c);
    const DestabilizerReport rep = extract_destabilizer(fr.H_final, Hhat, phi, s, geo);
    REQUIRE(rep.status == DestabilizerStatus::found);
    REQUIRE(rep.lambdas.size() == 2);
    CHECK(op_distance(rep.projections[0], summand_projection({0}, Hhat)) < 1e-9);
    CHECK(std::abs(rep.pieces[0].degree) < 1e-9);
    CHECK(rep.nu >= -1e-3);
    CHECK(rep.nu <= 1e-3);
    CHECK(rep.pieces[0].higgs_residual <= rep.residual_bound);
    CHECK(rep.pieces[0].dbar_residual <= rep.residual_bound);
    // classify agrees: semistable, so no negative ν beyond the tolerance
    CHECK(classify(s).kind == Stability::strictly_semistable);
}
