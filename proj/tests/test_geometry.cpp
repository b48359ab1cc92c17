#include <cmath>

#include "doctest.h"
#include "hfl/geometry.hpp"
#include "test_util.hpp"

using namespace hfl;
using testutil::max_diff;
using testutil::random_field;
using testutil::Rng;

namespace {

// Eighth-order centred second difference of a periodic samples array.
std::vector<double> fd_second(const std::vector<double>& f, double h) {
    static const double c[5] = {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    const int N = static_cast<int>(f.size());
    std::vector<double> out(N);
    for (int i = 0; i < N; ++i) {
        double s = c[0] * f[i];
        for (int k = 1; k <= 4; ++k) s += c[k] * (f[(i + k) % N] + f[(i - k + N) % N]);
        out[i] = s / (h * h);
    }
    return out;
}

}  // namespace

TEST_CASE("geometry rejects unsupported dimensions and bad metrics") {
    CHECK_THROWS_AS(TorusGeometry::make(3, 8), Error);
    CHECK_THROWS_AS(TorusGeometry::make(0, 8), Error);
    CHECK_THROWS_AS(TorusGeometry::make(1, 48), Error);
    Eigen::MatrixXcd g(1, 1);
    g(0, 0) = -1.0;
    CHECK_THROWS_AS(TorusGeometry::make(1, 8, {}, g), Error);
}

TEST_CASE("volume is det(g) times covolume and matches quadrature") {
    Rng rng(11);
    Eigen::MatrixXcd g = testutil::random_hermitian_pd(2, rng);
    auto geo = TorusGeometry::make(2, 8, {1.0, 2.0, 0.5, 1.5}, g);
    const double analytic = g.determinant().real() * 1.5;
    CHECK(std::abs(geo.volume() - analytic) <= 1e-12 * analytic);
    const double quad = geo.integrate(geo.constant(1.0)).real();
    CHECK(std::abs(quad - analytic) <= 1e-12 * analytic);
}

TEST_CASE("laplacian of a constant vanishes") {
    auto geo = TorusGeometry::make(1, 32);
    CHECK(sup_abs(laplacian(geo.constant(3.5), geo)) < 1e-12);
}

TEST_CASE("laplacian of cos(2 pi x) against an eighth-order finite-difference oracle") {
    const int N = 256;
    auto geo = TorusGeometry::make(1, N);
    Field f = geo.from_function([](const double* x) { return cplx(std::cos(2 * kPi * x[0]), 0.0); });
    Field lf = laplacian(f, geo);

    std::vector<double> line(N);
    for (int i = 0; i < N; ++i) line[i] = std::cos(2 * kPi * i / double(N));
    auto fd = fd_second(line, 1.0 / N);
    double worst = 0.0;
    for (std::size_t p = 0; p < geo.points(); ++p) {
        const int ix = static_cast<int>(p / N);
        worst = std::max(worst, std::abs(lf.v[p].real() - fd[ix]));
    }
    CHECK(worst <= 1e-6);
    // Frozen: eigenvalue −4π².
    double frozen = 0.0;
    for (std::size_t p = 0; p < geo.points(); ++p)
        frozen = std::max(frozen, std::abs(lf.v[p] - (-4 * kPi * kPi) * f.v[p]));
    CHECK(frozen <= 1e-9);
}

TEST_CASE("laplacian of a product of modes on the two-dimensional torus") {
    auto geo = TorusGeometry::make(2, 16);
    Field f = geo.from_function(
        [](const double* x) { return cplx(std::cos(2 * kPi * x[0]) * std::sin(4 * kPi * x[3]), 0.0); });
    // Per-axis eigenvalues by the finite-difference oracle on a fine 1D grid.
    const int M = 512;
    std::vector<double> a(M), b(M);
    for (int i = 0; i < M; ++i) {
        a[i] = std::cos(2 * kPi * i / double(M));
        b[i] = std::sin(4 * kPi * i / double(M) + 0.3);
    }
    const double ea = fd_second(a, 1.0 / M)[0] / a[0];
    const double eb = fd_second(b, 1.0 / M)[0] / b[0];
    CHECK(ea == doctest::Approx(-4 * kPi * kPi).epsilon(1e-8));
    CHECK(eb == doctest::Approx(-16 * kPi * kPi).epsilon(1e-8));
    Field lf = laplacian(f, geo);
    double worst = 0.0;
    for (std::size_t p = 0; p < geo.points(); ++p) worst = std::max(worst, std::abs(lf.v[p] - (ea + eb) * f.v[p]));
    CHECK(worst <= 1e-5);
    CHECK(max_diff(lf.v, [&] {
              CVec v = f.v;
              for (auto& x : v) x *= -20 * kPi * kPi;
              return v;
          }()) <= 1e-9);
}

TEST_CASE("contraction normalisation and degree checks") {
    for (int n : {1, 2}) {
        Rng rng(5 + n);
        auto geo = TorusGeometry::make(n, 8, {}, testutil::random_hermitian_pd(n, rng));
        Field l = contract(kahler_form(geo), geo);
        for (auto& x : l.v) CHECK(std::abs(x - cplx(n, 0)) < 1e-12);
    }
    auto geo = TorusGeometry::make(1, 8);
    // ω = (i/c) dz∧dz̄ has Λω = 1, so Λ(i a dz∧dz̄) = c·a. Oracle: c read off from ω itself.
    const double c = 1.0 / (kahler_form(geo).c[0].v[0] / cplx(0.0, 1.0)).real();
    CHECK(c == doctest::Approx(2.0));
    const cplx a(0.7, 0.0);
    Form alpha{1, 1, {geo.constant(cplx(0.0, 1.0) * a)}};
    Field out = contract(alpha, geo);
    CHECK(std::abs(out.v[3] - c * a) < 1e-14);

    Form zero{1, 1, {geo.zeros()}};
    CHECK(sup_abs(contract(zero, geo)) == 0.0);
    Form wrong{1, 0, {geo.zeros()}};
    CHECK_THROWS_AS(contract(wrong, geo), Error);
}

TEST_CASE("heat smoothing examples") {
    auto geo = TorusGeometry::make(1, 32);
    CHECK(max_diff(heat_smooth(geo.constant(2.0), 0.3, geo).v, geo.constant(2.0).v) < 1e-13);
    Field f = geo.from_function([](const double* x) { return cplx(std::cos(2 * kPi * x[0]), 0.0); });
    const double t = 0.01;
    Field h = heat_smooth(f, t, geo);
    CVec expect = f.v;
    for (auto& x : expect) x *= std::exp(-4 * kPi * kPi * t);
    CHECK(max_diff(h.v, expect) < 1e-13);
    CHECK(max_diff(heat_smooth(f, 0.0, geo).v, f.v) == 0.0);
    CHECK_THROWS_AS(heat_smooth(f, -1e-3, geo), Error);
}

TEST_CASE("heat semigroup property on random fields") {
    Rng rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const int n = 1 + trial % 2;
        auto geo = TorusGeometry::make(n, n == 1 ? 32 : 8, {}, testutil::random_hermitian_pd(n, rng));
        Field f = random_field(geo, 3, rng);
        const double s = rng.uniform(0.0, 0.05), t = rng.uniform(0.0, 0.05);
        Field a = heat_smooth(heat_smooth(f, s, geo), t, geo);
        Field b = heat_smooth(f, s + t, geo);
        CHECK(max_diff(a.v, b.v) <= 1e-12);
    }
}

TEST_CASE("heat smoothing obeys the maximum principle") {
    // The bound is the sup of the underlying trigonometric polynomial, sampled on a 4x finer grid.
    for (int trial = 0; trial < 8; ++trial) {
        auto geo = TorusGeometry::make(1, 32);
        auto fine = TorusGeometry::make(1, 128);
        Rng r1(100 + trial), r2(100 + trial);
        Field f = random_field(geo, 4, r1, true);
        Field ff = random_field(fine, 4, r2, true);
        const double bound = sup_abs(ff);
        for (double t : {0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0}) CHECK(sup_abs(heat_smooth(f, t, geo)) <= bound * (1 + 1e-12));
    }
}

TEST_CASE("green solve examples and round trip") {
    auto geo = TorusGeometry::make(1, 32);
    CHECK(sup_abs(green_solve(geo.zeros(), geo)) == 0.0);
    Field f = geo.from_function([](const double* x) { return cplx(std::cos(2 * kPi * x[0]), 0.0); });
    Field u = green_solve(f, geo);
    CVec expect = f.v;
    for (auto& x : expect) x /= -4 * kPi * kPi;
    CHECK(max_diff(u.v, expect) < 1e-14);

    Rng rng(3);
    for (int n : {1, 2}) {
        auto g2 = TorusGeometry::make(n, n == 1 ? 32 : 8, {}, testutil::random_hermitian_pd(n, rng));
        Field r = random_field(g2, 3, rng);
        const cplx m = g2.integrate(r) / g2.volume();
        for (auto& x : r.v) x -= m;
        CHECK(max_diff(laplacian(green_solve(r, g2), g2).v, r.v) <= 1e-8);
        CHECK(max_diff(green_solve(laplacian(r, g2), g2).v, r.v) <= 1e-8);
    }
    CHECK_THROWS_AS(green_solve(geo.constant(1.0), geo), Error);
}

TEST_CASE("dbar and dee on single modes") {
    auto geo = TorusGeometry::make(1, 16);
    CHECK(sup_abs(dbar(geo.constant(1.0), geo).c[0]) == 0.0);
    CHECK(sup_abs(dee(geo.constant(1.0), geo).c[0]) == 0.0);
    // f = e^{2πix}: ∂ = ½(∂x − i∂y) and ∂̄ = ½(∂x + i∂y) both give πi f.
    Field f = geo.from_function([](const double* x) { return std::polar(1.0, 2 * kPi * x[0]); });
    Field g = geo.from_function([](const double* x) { return std::polar(1.0, 2 * kPi * x[1]); });
    CVec pif = f.v, pig = g.v, mpig = g.v;
    for (auto& x : pif) x *= cplx(0.0, kPi);
    for (auto& x : pig) x *= kPi;
    for (auto& x : mpig) x *= -kPi;
    CHECK(max_diff(dee(f, geo).c[0].v, pif) < 1e-12);
    CHECK(max_diff(dbar(f, geo).c[0].v, pif) < 1e-12);
    CHECK(max_diff(dee(g, geo).c[0].v, pig) < 1e-12);
    CHECK(max_diff(dbar(g, geo).c[0].v, mpig) < 1e-12);
}

TEST_CASE("dbar dbar and dee dee vanish") {
    Rng rng(8);
    auto geo = TorusGeometry::make(2, 8);
    Field f = random_field(geo, 3, rng);
    Form a = dbar(f, geo), b = dee(f, geo);
    auto a12 = dbar(a.c[1], geo).c[0].v, a21 = dbar(a.c[0], geo).c[1].v;
    auto b12 = dee(b.c[1], geo).c[0].v, b21 = dee(b.c[0], geo).c[1].v;
    CHECK(max_diff(a12, a21) < 1e-11);
    CHECK(max_diff(b12, b21) < 1e-11);
}

TEST_CASE("laplacian equals twice the contraction of i dd-bar") {
    Rng rng(77);
    for (int n : {1, 2}) {
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<double> L = {1.0, 1.3, 0.9, 1.1};
            L.resize(2 * n);
            auto geo = TorusGeometry::make(n, n == 1 ? 32 : 8, L, testutil::random_hermitian_pd(n, rng));
            Field f = random_field(geo, 3, rng);
            Form ddb = dbar_of_10(dee(f, geo), geo);  // ∂̄∂f = −∂∂̄f
            for (auto& c : ddb.c)
                for (auto& x : c.v) x = -x;
            Field lhs = laplacian(f, geo);
            Field rhs = contract(times_i(ddb), geo);
            for (auto& x : rhs.v) x *= 2.0;
            const double scale = std::max(1.0, sup_abs(lhs));
            CHECK(max_diff(lhs.v, rhs.v) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("twisted fields need a matching descriptor") {
    auto geo = TorusGeometry::make(1, 16);
    Field s = geo.zeros(1);
    CHECK_THROWS_AS(dbar(s, geo), Error);
    Twist wrong{2};
    CHECK_THROWS_AS(dbar(s, geo, &wrong), Error);
    Twist ok{1};
    CHECK_NOTHROW(dbar(s, geo, &ok));
    CHECK_THROWS_AS(laplacian(s, geo), Error);
    auto geo2 = TorusGeometry::make(2, 4);
    Field s2 = geo2.zeros(1);
    CHECK_THROWS_AS(dbar(s2, geo2, &ok), Error);
}

TEST_CASE("twisted derivatives commute to the constant curvature") {
    // [∇_x, ∇_y] = F_xy = −2πi d/(Lx Ly) on a smooth twisted section.
    const int d = 1;
    auto geo = TorusGeometry::make(1, 64);
    Field s = geo.zeros(d);
    for (std::size_t p = 0; p < geo.points(); ++p) {
        const double x = geo.coord(p, 0), y = geo.coord(p, 1);
        cplx acc = 0.0;
        for (int m = -6; m <= 6; ++m) acc += std::exp(-2.0 * kPi * (x - m) * (x - m)) * std::polar(1.0, 2 * kPi * m * y) *
                                             (1.0 + 0.3 * std::cos(2 * kPi * y));
        s.v[p] = acc;
    }
    Twist tw{d};
    Form ds = dee(s, geo, &tw);
    Form dbs = dbar(s, geo, &tw);
    CVec a = dbar(ds.c[0], geo, &tw).c[0].v;
    CVec b = dee(dbs.c[0], geo, &tw).c[0].v;
    // (∇x+i∇y)(∇x−i∇y) − (∇x−i∇y)(∇x+i∇y) = −2i[∇x, ∇y], so ∂̄∂s − ∂∂̄s = −(i/2) F_xy s.
    const cplx Fxy = cplx(0.0, -2.0 * kPi * d);
    double worst = 0.0, scale = sup_abs(s);
    for (std::size_t p = 0; p < geo.points(); ++p)
        worst = std::max(worst, std::abs((a[p] - b[p]) - cplx(0.0, -0.5) * Fxy * s.v[p]));
    CHECK(worst <= 1e-9 * scale);
}
