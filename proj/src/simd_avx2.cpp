// AVX2+FMA variants of the arithmetic kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; it must stay behind the runtime
// dispatch in simd_dispatch.cpp.

#include "sntk/simd.hpp"

#if defined(SNTK_HAVE_AVX2)

#include <immintrin.h>

namespace sntk::simd {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

// Row-wise dot on purpose: callers rely on matvec(...)[r] being bitwise
// equal to dot(row_r, x) within a backend.
void matvec_avx2(const double* rows, std::size_t nrows, std::size_t cols,
                 const double* x, double* out) {
    for (std::size_t r = 0; r < nrows; ++r)
        out[r] = dot_avx2(rows + r * cols, x, cols);
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable t{"avx2", dot_avx2, axpy_avx2, matvec_avx2};
    return t;
}

}  // namespace sntk::simd

#endif  // SNTK_HAVE_AVX2
