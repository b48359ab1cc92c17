#include "hfl/types.hpp"

#include <atomic>

namespace hfl {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::shape: return "shape";
        case ErrorKind::degree: return "degree";
        case ErrorKind::parameter: return "parameter";
        case ErrorKind::mean: return "mean";
        case ErrorKind::twist: return "twist";
        case ErrorKind::unsupported: return "unsupported-configuration";
        case ErrorKind::metric: return "metric";
        case ErrorKind::degeneracy: return "degeneracy";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::projection: return "projection";
        case ErrorKind::filtration: return "filtration";
        case ErrorKind::invariance: return "invariance";
        case ErrorKind::config: return "config";
    }
    return "unknown";
}

namespace {

template <class T>
T tree_sum(const T* x, std::size_t n) {
    if (n <= 64) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return tree_sum(x, h) + tree_sum(x + h, n - h);
}

std::atomic<int> g_threads{1};

}  // namespace

double pairwise_sum(const double* x, std::size_t n) { return tree_sum(x, n); }
cplx pairwise_sum(const cplx* x, std::size_t n) { return tree_sum(x, n); }

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int threads() { return g_threads; }

}  // namespace hfl
