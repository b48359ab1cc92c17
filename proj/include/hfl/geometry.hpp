#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "hfl/types.hpp"

namespace hfl {

// Charge of a section under the Landau-gauge multiplier s(x+Lx, y) = e^{2πi d y/Ly} s(x, y).
struct Twist {
    int flux = 0;
};

struct Field {
    CVec v;
    int twist = 0;  // flux charge; 0 means periodic
};

// Coefficient arrays of a (p,q)-form. (1,0) and (0,1): one array per dz^i / dz̄^i.
// (1,1): n*n arrays, entry i*n+j multiplies dz^i∧dz̄^j. (2,0)/(0,2) (n = 2 only): one
// array multiplying dz¹∧dz² resp. dz̄¹∧dz̄².
struct Form {
    int p = 0;
    int q = 0;
    std::vector<Field> c;
};

class Spectral;

class TorusGeometry {
public:
    // periods: 2n lengths (Lx1, Ly1, Lx2, Ly2); empty means unit lengths.
    // g: n×n Hermitian positive definite; empty means identity.
    static TorusGeometry make(int n, int N, std::vector<double> periods = {},
                              Eigen::MatrixXcd g = Eigen::MatrixXcd());

    int n() const { return n_; }
    int N() const { return N_; }
    int dims() const { return 2 * n_; }
    std::size_t points() const { return points_; }
    const std::vector<double>& periods() const { return periods_; }
    const Eigen::MatrixXcd& g() const { return g_; }
    const Eigen::MatrixXcd& ginv() const { return ginv_; }
    double covolume() const { return covolume_; }
    double volume() const { return volume_; }
    // Λ(iβ_{ij̄} dz^i∧dz̄^j) = lambda_factor · g^{ij̄} β_{ij̄}. The only place the convention lives.
    double lambda_factor() const { return lambda_factor_; }
    // Same geometry with a different Λ factor and the original Laplacian (fault injection).
    TorusGeometry with_lambda_factor(double c) const;

    // Real coordinate of grid point `p` along real axis `axis` (0 = x1, 1 = y1, ...).
    double coord(std::size_t p, int axis) const;
    std::size_t index(const std::vector<int>& multi) const;

    Field zeros(int twist = 0) const { return Field{CVec(points_, cplx(0.0)), twist}; }
    Field constant(cplx c) const { return Field{CVec(points_, c), 0}; }
    Field from_function(const std::function<cplx(const double*)>& f) const;

    // Grid mean times volume, pairwise summed.
    cplx integrate(const Field& f) const { return integrate(f.v); }
    cplx integrate(const CVec& v) const;
    double integrate_real(const std::vector<double>& v) const;

    // Raw spectral kernels used by the matrix-field code.
    // out = ∂_i in (bar = false) or ∂̄_i in (bar = true) on a field of the given charge.
    void derivative(const CVec& in, int i, bool bar, int twist, CVec& out) const;
    // Multiplies the Fourier coefficients of `v` by m(λ(k)) where λ(k) ≤ 0 is the Laplacian symbol.
    void apply_symbol(CVec& v, const std::function<double(double)>& m) const;
    const std::vector<double>& laplacian_symbol() const;
    // Unnormalized forward transform and normalized inverse, in place.
    void to_fourier(CVec& v) const;
    void from_fourier(CVec& v) const;

private:
    int n_ = 1;
    int N_ = 64;
    std::size_t points_ = 0;
    std::vector<double> periods_;
    Eigen::MatrixXcd g_;
    Eigen::MatrixXcd ginv_;
    double covolume_ = 1.0;
    double volume_ = 1.0;
    double lambda_factor_ = 2.0;
    std::shared_ptr<const Spectral> spec_;
};

Field laplacian(const Field& f, const TorusGeometry& geo);
Field contract(const Form& alpha, const TorusGeometry& geo);
Field heat_smooth(const Field& f, double t, const TorusGeometry& geo);
Field green_solve(const Field& f, const TorusGeometry& geo);
Form dbar(const Field& f, const TorusGeometry& geo, const Twist* twist = nullptr);
Form dee(const Field& f, const TorusGeometry& geo, const Twist* twist = nullptr);
// ∂̄ of a (1,0)-form, giving the (1,1)-form with coefficients −∂_j̄ a_i on dz^i∧dz̄^j.
Form dbar_of_10(const Form& a, const TorusGeometry& geo);
// i·α for a form α.
Form times_i(const Form& a);
// The Kähler form ω as a (1,1)-form field.
Form kahler_form(const TorusGeometry& geo);

double sup_abs(const Field& f);
double sup_abs(const CVec& v);

}  // namespace hfl
