#include "sntk/simd.hpp"

namespace sntk::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_scalar(const double* rows, std::size_t nrows, std::size_t cols,
                   const double* x, double* out) {
    for (std::size_t r = 0; r < nrows; ++r)
        out[r] = dot_scalar(rows + r * cols, x, cols);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable t{"scalar", dot_scalar, axpy_scalar, matvec_scalar};
    return t;
}

std::size_t and_popcount(const std::uint64_t* a, const std::uint64_t* b,
                         std::size_t nwords) {
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 4 <= nwords; i += 4) {
        count += static_cast<std::size_t>(__builtin_popcountll(a[i] & b[i]));
        count += static_cast<std::size_t>(__builtin_popcountll(a[i + 1] & b[i + 1]));
        count += static_cast<std::size_t>(__builtin_popcountll(a[i + 2] & b[i + 2]));
        count += static_cast<std::size_t>(__builtin_popcountll(a[i + 3] & b[i + 3]));
    }
    for (; i < nwords; ++i)
        count += static_cast<std::size_t>(__builtin_popcountll(a[i] & b[i]));
    return count;
}

}  // namespace sntk::simd
