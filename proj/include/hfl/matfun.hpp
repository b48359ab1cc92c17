#pragma once

#include <cmath>

#include "hfl/small.hpp"

namespace hfl {

// Functions of Hermitian matrices through the eigen-decomposition.
template <class F>
Mat herm_apply(const Mat& X, F f) {
    return small::herm_fn(X, f);
}

inline Mat herm_part(const Mat& X) { return 0.5 * (X + X.adjoint()); }
inline Mat herm_exp(const Mat& X) { return herm_apply(X, [](double x) { return std::exp(x); }); }
inline Mat herm_log(const Mat& X) { return herm_apply(X, [](double x) { return std::log(x); }); }
inline Mat herm_sqrt(const Mat& X) { return herm_apply(X, [](double x) { return std::sqrt(x); }); }
inline Mat herm_isqrt(const Mat& X) { return herm_apply(X, [](double x) { return 1.0 / std::sqrt(x); }); }

inline double log_det_pd(const Mat& X) {
    Mat L;
    if (!small::chol(X, L)) return std::nan("");
    return small::log_det(L);
}

}  // namespace hfl
