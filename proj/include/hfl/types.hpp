#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hfl {

using cplx = std::complex<double>;

// FFTW only takes its SIMD codelets on aligned arrays.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}
    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) { ::operator delete(p, kAlign); }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
};

using CVec = std::vector<cplx, AlignedAlloc<cplx>>;

// Small endomorphisms never exceed rank 4; fixed capacity keeps them off the heap.
constexpr int kMaxRank = 4;
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxRank, kMaxRank>;
using RVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxRank, 1>;
using SVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxRank, 1>;

constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
    shape,
    degree,
    parameter,
    mean,
    twist,
    unsupported,
    metric,
    degeneracy,
    numerical,
    projection,
    filtration,
    invariance,
    config,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

class DegeneracyError : public Error {
public:
    DegeneracyError(std::size_t point, double cond, const std::string& where)
        : Error(ErrorKind::degeneracy, "metric condition number " + std::to_string(cond) +
                                           " exceeds cap at grid point " + std::to_string(point) +
                                           " (" + where + ")"),
          point_(point),
          cond_(cond) {}
    std::size_t point() const { return point_; }
    double cond() const { return cond_; }

private:
    std::size_t point_;
    double cond_;
};

// Pairwise-tree sum; the split points depend only on the length, so the
// result is independent of how callers partition work.
double pairwise_sum(const double* x, std::size_t n);
cplx pairwise_sum(const cplx* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }
inline cplx pairwise_sum(const CVec& x) { return pairwise_sum(x.data(), x.size()); }

// Worker count for pointwise grid loops. Results never depend on it.
void set_threads(int n);
int threads();

// Runs f(begin, end) over contiguous chunks of [0, n).
template <class F>
void parallel_for(std::size_t n, F&& f);

}  // namespace hfl

#include "hfl/parallel_impl.hpp"
