#include "hfl/geometry.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace hfl {

namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

bool is_power_of_two(int N) { return N >= 2 && (N & (N - 1)) == 0; }

}  // namespace

class Spectral {
public:
    Spectral(int D, int N, const std::vector<double>& L, const Eigen::MatrixXcd& ginv, double c)
        : D_(D), N_(N) {
        P_ = 1;
        for (int a = 0; a < D; ++a) P_ *= static_cast<std::size_t>(N);
        const int n = D / 2;

        std::vector<std::vector<double>> kfull(D), kder(D);
        for (int a = 0; a < D; ++a) {
            kfull[a].resize(N);
            kder[a].resize(N);
            for (int m = 0; m < N; ++m) {
                const int s = m < N / 2 ? m : m - N;
                kfull[a][m] = 2.0 * kPi * s / L[a];
                kder[a][m] = (m == N / 2) ? 0.0 : kfull[a][m];
            }
        }
        kder_ = kder;

        lap_.assign(P_, 0.0);
        dz_.assign(n, CVec(P_));
        dzb_.assign(n, CVec(P_));
        std::vector<int> m(D, 0);
        for (std::size_t p = 0; p < P_; ++p) {
            std::size_t r = p;
            for (int a = D - 1; a >= 0; --a) {
                m[a] = static_cast<int>(r % N);
                r /= N;
            }
            cplx kap[2];
            for (int i = 0; i < n; ++i) {
                kap[i] = cplx(kfull[2 * i][m[2 * i]], -kfull[2 * i + 1][m[2 * i + 1]]);
                const double kx = kder[2 * i][m[2 * i]];
                const double ky = kder[2 * i + 1][m[2 * i + 1]];
                dz_[i][p] = cplx(0.0, 0.5) * cplx(kx, -ky);
                dzb_[i][p] = cplx(0.0, 0.5) * cplx(kx, ky);
            }
            cplx s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s += ginv(j, i) * kap[i] * std::conj(kap[j]);
            lap_[p] = -0.5 * c * s.real();
        }

        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_complex* buf = fftw_alloc_complex(P_);
        std::vector<int> dims(D, N);
        const unsigned flags = FFTW_ESTIMATE;
        fwd_ = fftw_plan_dft(D, dims.data(), buf, buf, FFTW_FORWARD, flags);
        bwd_ = fftw_plan_dft(D, dims.data(), buf, buf, FFTW_BACKWARD, flags);
        if (D == 2) {
            int nn[1] = {N};
            ax_fwd_[0] = fftw_plan_many_dft(1, nn, N, buf, nullptr, N, 1, buf, nullptr, N, 1,
                                            FFTW_FORWARD, flags);
            ax_bwd_[0] = fftw_plan_many_dft(1, nn, N, buf, nullptr, N, 1, buf, nullptr, N, 1,
                                            FFTW_BACKWARD, flags);
            ax_fwd_[1] = fftw_plan_many_dft(1, nn, N, buf, nullptr, 1, N, buf, nullptr, 1, N,
                                            FFTW_FORWARD, flags);
            ax_bwd_[1] = fftw_plan_many_dft(1, nn, N, buf, nullptr, 1, N, buf, nullptr, 1, N,
                                            FFTW_BACKWARD, flags);
        }
        fftw_free(buf);
    }

    ~Spectral() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        for (int a = 0; a < 2; ++a) {
            if (ax_fwd_[a]) fftw_destroy_plan(ax_fwd_[a]);
            if (ax_bwd_[a]) fftw_destroy_plan(ax_bwd_[a]);
        }
    }

    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    void forward(CVec& v) const { fftw_execute_dft(fwd_, as_fftw(v.data()), as_fftw(v.data())); }
    void backward(CVec& v) const {
        fftw_execute_dft(bwd_, as_fftw(v.data()), as_fftw(v.data()));
        const double s = 1.0 / static_cast<double>(P_);
        for (auto& x : v) x *= s;
    }
    // 1D spectral derivative along `axis` of a 2D periodic array.
    void axis_derivative(CVec& v, int axis) const {
        fftw_execute_dft(ax_fwd_[axis], as_fftw(v.data()), as_fftw(v.data()));
        const double s = 1.0 / static_cast<double>(N_);
        for (std::size_t p = 0; p < P_; ++p) {
            const int m = axis == 0 ? static_cast<int>(p / N_) : static_cast<int>(p % N_);
            v[p] *= cplx(0.0, kder_[axis][m] * s);
        }
        fftw_execute_dft(ax_bwd_[axis], as_fftw(v.data()), as_fftw(v.data()));
    }

    std::size_t P() const { return P_; }
    const std::vector<double>& lap() const { return lap_; }
    const CVec& dz(int i) const { return dz_[i]; }
    const CVec& dzb(int i) const { return dzb_[i]; }

private:
    int D_;
    int N_;
    std::size_t P_ = 0;
    std::vector<std::vector<double>> kder_;
    std::vector<double> lap_;
    std::vector<CVec> dz_, dzb_;
    fftw_plan fwd_ = nullptr, bwd_ = nullptr;
    fftw_plan ax_fwd_[2] = {nullptr, nullptr};
    fftw_plan ax_bwd_[2] = {nullptr, nullptr};
};

TorusGeometry TorusGeometry::make(int n, int N, std::vector<double> periods, Eigen::MatrixXcd g) {
    if (n != 1 && n != 2)
        throw Error(ErrorKind::parameter, "complex dimension must be 1 or 2, got " + std::to_string(n));
    if (!is_power_of_two(N))
        throw Error(ErrorKind::parameter, "resolution must be a power of two, got " + std::to_string(N));
    if (periods.empty()) periods.assign(2 * n, 1.0);
    if (static_cast<int>(periods.size()) != 2 * n)
        throw Error(ErrorKind::parameter, "expected " + std::to_string(2 * n) + " periods");
    for (double L : periods)
        if (!(L > 0.0)) throw Error(ErrorKind::parameter, "periods must be positive");
    if (g.size() == 0) g = Eigen::MatrixXcd::Identity(n, n);
    if (g.rows() != n || g.cols() != n) throw Error(ErrorKind::parameter, "kahler_coeffs must be n×n");
    if ((g - g.adjoint()).norm() > 1e-14 * (1.0 + g.norm()))
        throw Error(ErrorKind::parameter, "kahler_coeffs must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw Error(ErrorKind::parameter, "kahler_coeffs must be positive definite");

    TorusGeometry geo;
    geo.n_ = n;
    geo.N_ = N;
    geo.points_ = 1;
    for (int a = 0; a < 2 * n; ++a) geo.points_ *= static_cast<std::size_t>(N);
    geo.periods_ = periods;
    geo.g_ = g;
    geo.ginv_ = g.inverse();
    geo.covolume_ = 1.0;
    for (double L : periods) geo.covolume_ *= L;
    geo.volume_ = g.determinant().real() * geo.covolume_;
    geo.spec_ = std::make_shared<const Spectral>(2 * n, N, periods, geo.ginv_, geo.lambda_factor_);
    return geo;
}

TorusGeometry TorusGeometry::with_lambda_factor(double c) const {
    TorusGeometry geo = *this;
    // the spectral Laplacian keeps the true factor, so the fault is visible against the heat kernel
    geo.lambda_factor_ = c;
    return geo;
}

double TorusGeometry::coord(std::size_t p, int axis) const {
    std::size_t stride = 1;
    for (int a = dims() - 1; a > axis; --a) stride *= static_cast<std::size_t>(N_);
    const auto m = static_cast<double>((p / stride) % static_cast<std::size_t>(N_));
    return m * periods_[axis] / N_;
}

std::size_t TorusGeometry::index(const std::vector<int>& multi) const {
    std::size_t p = 0;
    for (int a = 0; a < dims(); ++a) {
        const int m = ((multi[a] % N_) + N_) % N_;
        p = p * static_cast<std::size_t>(N_) + static_cast<std::size_t>(m);
    }
    return p;
}

Field TorusGeometry::from_function(const std::function<cplx(const double*)>& f) const {
    Field out = zeros();
    double x[4];
    for (std::size_t p = 0; p < points_; ++p) {
        for (int a = 0; a < dims(); ++a) x[a] = coord(p, a);
        out.v[p] = f(x);
    }
    return out;
}

cplx TorusGeometry::integrate(const CVec& v) const {
    if (v.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    return pairwise_sum(v) * (volume_ / static_cast<double>(points_));
}

double TorusGeometry::integrate_real(const std::vector<double>& v) const {
    if (v.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    return pairwise_sum(v) * (volume_ / static_cast<double>(points_));
}

const std::vector<double>& TorusGeometry::laplacian_symbol() const { return spec_->lap(); }

void TorusGeometry::to_fourier(CVec& v) const {
    if (v.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    spec_->forward(v);
}

void TorusGeometry::from_fourier(CVec& v) const {
    if (v.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    spec_->backward(v);
}

void TorusGeometry::apply_symbol(CVec& v, const std::function<double(double)>& m) const {
    if (v.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    spec_->forward(v);
    const auto& lap = spec_->lap();
    for (std::size_t p = 0; p < points_; ++p) v[p] *= m(lap[p]);
    spec_->backward(v);
}

namespace {

bool is_constant(const CVec& v) {
    for (const auto& x : v)
        if (x != v[0]) return false;
    return true;
}

}  // namespace

void TorusGeometry::derivative(const CVec& in, int i, bool bar, int twist, CVec& out) const {
    if (in.size() != points_) throw Error(ErrorKind::shape, "field size does not match grid");
    if (i < 0 || i >= n_) throw Error(ErrorKind::parameter, "derivative index out of range");
    out.resize(points_);
    if (twist == 0) {
        if (is_constant(in)) {
            std::fill(out.begin(), out.end(), cplx(0.0));
            return;
        }
        out = in;
        spec_->forward(out);
        const CVec& sym = bar ? spec_->dzb(i) : spec_->dz(i);
        for (std::size_t p = 0; p < points_; ++p) out[p] *= sym[p];
        spec_->backward(out);
        return;
    }
    if (n_ != 1) throw Error(ErrorKind::twist, "twisted sections are supported only for n = 1");
    // Covariant derivatives in the Landau gauge A = −2πi d x dy/(Lx Ly):
    // ∇_x s = e^{iθ} ∂_x(e^{−iθ} s) + (2πi d y/(Lx Ly)) s with θ = 2π d x y/(Lx Ly),
    // ∇_y s = ∂_y s − (2πi d x/(Lx Ly)) s.
    const double area = periods_[0] * periods_[1];
    const double q = 2.0 * kPi * twist / area;
    CVec wx(points_), dy = in;
    for (std::size_t p = 0; p < points_; ++p) {
        const double x = coord(p, 0), y = coord(p, 1);
        wx[p] = std::polar(1.0, -q * x * y) * in[p];
    }
    spec_->axis_derivative(wx, 0);
    spec_->axis_derivative(dy, 1);
    const cplx half_sign = bar ? cplx(0.0, 0.5) : cplx(0.0, -0.5);
    for (std::size_t p = 0; p < points_; ++p) {
        const double x = coord(p, 0), y = coord(p, 1);
        const cplx nx = std::polar(1.0, q * x * y) * wx[p] + cplx(0.0, q * y) * in[p];
        const cplx ny = dy[p] - cplx(0.0, q * x) * in[p];
        out[p] = 0.5 * nx + half_sign * ny;
    }
}

namespace {

void require_untwisted(const Field& f, const char* op) {
    if (f.twist != 0) throw Error(ErrorKind::twist, std::string(op) + " requires an untwisted field");
}

void require_shape(const Field& f, const TorusGeometry& geo) {
    if (f.v.size() != geo.points()) throw Error(ErrorKind::shape, "field size does not match grid");
}

int resolve_twist(const Field& f, const Twist* twist) {
    if (f.twist != 0 && twist == nullptr)
        throw Error(ErrorKind::twist, "twisted field supplied without a twist descriptor");
    if (twist != nullptr && twist->flux != f.twist)
        throw Error(ErrorKind::twist, "twist descriptor does not match the field's flux");
    return f.twist;
}

}  // namespace

Field laplacian(const Field& f, const TorusGeometry& geo) {
    require_shape(f, geo);
    require_untwisted(f, "laplacian");
    Field out = f;
    geo.apply_symbol(out.v, [](double l) { return l; });
    return out;
}

Field contract(const Form& alpha, const TorusGeometry& geo) {
    if (alpha.p != 1 || alpha.q != 1)
        throw Error(ErrorKind::degree, "contraction expects a (1,1)-form, got (" +
                                           std::to_string(alpha.p) + "," + std::to_string(alpha.q) + ")");
    const int n = geo.n();
    if (static_cast<int>(alpha.c.size()) != n * n) throw Error(ErrorKind::shape, "(1,1)-form needs n² arrays");
    Field out = geo.zeros();
    const cplx c = cplx(0.0, -geo.lambda_factor());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Field& a = alpha.c[i * n + j];
            require_shape(a, geo);
            const cplx w = c * geo.ginv()(j, i);
            for (std::size_t p = 0; p < geo.points(); ++p) out.v[p] += w * a.v[p];
        }
    return out;
}

Field heat_smooth(const Field& f, double t, const TorusGeometry& geo) {
    if (!(t >= 0.0)) throw Error(ErrorKind::parameter, "heat time must be nonnegative");
    require_shape(f, geo);
    require_untwisted(f, "heat_smooth");
    Field out = f;
    if (t == 0.0) return out;
    geo.apply_symbol(out.v, [t](double l) { return std::exp(t * l); });
    return out;
}

Field green_solve(const Field& f, const TorusGeometry& geo) {
    require_shape(f, geo);
    require_untwisted(f, "green_solve");
    const cplx mean = geo.integrate(f);
    double l1 = 0.0;
    {
        std::vector<double> a(f.v.size());
        for (std::size_t p = 0; p < a.size(); ++p) a[p] = std::abs(f.v[p]);
        l1 = geo.integrate_real(a);
    }
    if (std::abs(mean) > 1e-10 * l1)
        throw Error(ErrorKind::mean, "input integral " + std::to_string(std::abs(mean)) +
                                         " is not zero (L1 norm " + std::to_string(l1) + ")");
    Field out = f;
    geo.apply_symbol(out.v, [](double l) { return l == 0.0 ? 0.0 : 1.0 / l; });
    return out;
}

Form dbar(const Field& f, const TorusGeometry& geo, const Twist* twist) {
    require_shape(f, geo);
    const int tw = resolve_twist(f, twist);
    Form out{0, 1, {}};
    for (int i = 0; i < geo.n(); ++i) {
        Field c{CVec(), tw};
        geo.derivative(f.v, i, true, tw, c.v);
        out.c.push_back(std::move(c));
    }
    return out;
}

Form dee(const Field& f, const TorusGeometry& geo, const Twist* twist) {
    require_shape(f, geo);
    const int tw = resolve_twist(f, twist);
    Form out{1, 0, {}};
    for (int i = 0; i < geo.n(); ++i) {
        Field c{CVec(), tw};
        geo.derivative(f.v, i, false, tw, c.v);
        out.c.push_back(std::move(c));
    }
    return out;
}

Form dbar_of_10(const Form& a, const TorusGeometry& geo) {
    if (a.p != 1 || a.q != 0) throw Error(ErrorKind::degree, "dbar_of_10 expects a (1,0)-form");
    const int n = geo.n();
    Form out{1, 1, std::vector<Field>(n * n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Field& c = out.c[i * n + j];
            c.twist = a.c[i].twist;
            geo.derivative(a.c[i].v, j, true, c.twist, c.v);
            for (auto& x : c.v) x = -x;
        }
    return out;
}

Form times_i(const Form& a) {
    Form out = a;
    for (auto& c : out.c)
        for (auto& x : c.v) x *= cplx(0.0, 1.0);
    return out;
}

Form kahler_form(const TorusGeometry& geo) {
    // ω = i (1/λ_c) g_{ij̄} dz^i∧dz̄^j with λ_c the Λ factor, so that Λω = n.
    const int n = geo.n();
    Form out{1, 1, std::vector<Field>(n * n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.c[i * n + j] = geo.constant(cplx(0.0, 1.0) * geo.g()(i, j) / geo.lambda_factor());
    return out;
}

double sup_abs(const CVec& v) {
    double m = 0.0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_abs(const Field& f) { return sup_abs(f.v); }

}  // namespace hfl
