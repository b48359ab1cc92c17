#pragma once

#include <cmath>

#include "hfl/types.hpp"

// Pointwise kernels for r ≤ 4. Eigen's general decompositions carry blocking machinery
// that dominates the cost at these sizes.
namespace hfl::small {

// Lower Cholesky factor; false if A is not (numerically) positive definite.
inline bool chol(const Mat& A, Mat& L) {
    const int n = static_cast<int>(A.rows());
    L = Mat::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double d = A(j, j).real();
        for (int k = 0; k < j; ++k) d -= std::norm(L(j, k));
        if (!(d > 0.0)) return false;
        const double s = std::sqrt(d);
        L(j, j) = s;
        for (int i = j + 1; i < n; ++i) {
            cplx v = A(i, j);
            for (int k = 0; k < j; ++k) v -= L(i, k) * std::conj(L(j, k));
            L(i, j) = v / s;
        }
    }
    return true;
}

// Solves A X = B given the Cholesky factor of A.
inline Mat chol_solve(const Mat& L, const Mat& B) {
    const int n = static_cast<int>(L.rows());
    const int m = static_cast<int>(B.cols());
    Mat X = B;
    for (int c = 0; c < m; ++c) {
        for (int i = 0; i < n; ++i) {
            cplx v = X(i, c);
            for (int k = 0; k < i; ++k) v -= L(i, k) * X(k, c);
            X(i, c) = v / L(i, i).real();
        }
        for (int i = n - 1; i >= 0; --i) {
            cplx v = X(i, c);
            for (int k = i + 1; k < n; ++k) v -= std::conj(L(k, i)) * X(k, c);
            X(i, c) = v / L(i, i).real();
        }
    }
    return X;
}

// Solves L Y = B for lower-triangular L.
inline Mat lower_solve(const Mat& L, const Mat& B) {
    const int n = static_cast<int>(L.rows());
    Mat X = B;
    for (int c = 0; c < B.cols(); ++c)
        for (int i = 0; i < n; ++i) {
            cplx v = X(i, c);
            for (int k = 0; k < i; ++k) v -= L(i, k) * X(k, c);
            X(i, c) = v / L(i, i);
        }
    return X;
}

inline Mat hpd_inverse(const Mat& A) {
    Mat L;
    if (!chol(A, L)) return Mat::Constant(A.rows(), A.cols(), cplx(std::nan(""), 0.0));
    return chol_solve(L, Mat::Identity(A.rows(), A.cols()));
}

inline double log_det(const Mat& L) {
    double s = 0.0;
    for (int i = 0; i < L.rows(); ++i) s += 2.0 * std::log(L(i, i).real());
    return s;
}

// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues, orthonormal columns.
inline void herm_eigen(const Mat& A, RVec& w, Mat& V) {
    const int n = static_cast<int>(A.rows());
    if (n == 1) {
        w.resize(1);
        w(0) = A(0, 0).real();
        V = Mat::Identity(1, 1);
        return;
    }
    if (n == 2) {
        const double a = A(0, 0).real(), d = A(1, 1).real();
        const cplx b = 0.5 * (A(0, 1) + std::conj(A(1, 0)));
        const double m = 0.5 * (a + d), del = 0.5 * (a - d);
        const double rho = std::hypot(del, std::abs(b));
        w.resize(2);
        V.resize(2, 2);
        if (std::abs(b) == 0.0) {
            if (a <= d) {
                w << a, d;
                V << 1.0, 0.0, 0.0, 1.0;
            } else {
                w << d, a;
                V << 0.0, 1.0, 1.0, 0.0;
            }
            return;
        }
        double hi = m + rho, lo = m - rho;
        const double det = a * d - std::norm(b);
        if (m > 0.0) lo = det / hi;
        else if (m < 0.0) hi = det / lo;
        // eigenvector for hi, chosen to avoid cancellation
        cplx v0, v1;
        if (del >= 0.0) {
            v0 = rho + del;
            v1 = std::conj(b);
        } else {
            v0 = b;
            v1 = rho - del;
        }
        const double nv = std::sqrt(std::norm(v0) + std::norm(v1));
        v0 /= nv;
        v1 /= nv;
        w << lo, hi;
        V(0, 1) = v0;
        V(1, 1) = v1;
        V(0, 0) = -std::conj(v1);
        V(1, 0) = std::conj(v0);
        return;
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    w = es.eigenvalues();
    V = es.eigenvectors();
}

template <class F>
inline Mat herm_fn(const Mat& A, F f) {
    RVec w;
    Mat V;
    herm_eigen(A, w, V);
    for (int i = 0; i < w.size(); ++i) w(i) = f(w(i));
    return V * w.asDiagonal() * V.adjoint();
}

}  // namespace hfl::small
