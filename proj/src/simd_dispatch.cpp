#include "sntk/simd.hpp"

#include <atomic>

#include "sntk/errors.hpp"

namespace sntk::simd {

#if defined(SNTK_HAVE_AVX2)
const KernelTable& avx2_table();  // defined in simd_avx2.cpp
#endif

bool avx2_available() {
#if defined(SNTK_HAVE_AVX2)
    static const bool ok =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

namespace {

const KernelTable* best_table() {
#if defined(SNTK_HAVE_AVX2)
    if (avx2_available()) return &avx2_table();
#endif
    return &scalar_table();
}

std::atomic<const KernelTable*> g_active{nullptr};

const KernelTable* active_table() {
    const KernelTable* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        t = best_table();
        g_active.store(t, std::memory_order_release);
    }
    return t;
}

}  // namespace

const KernelTable& table_for(Backend b) {
    switch (b) {
        case Backend::scalar:
            return scalar_table();
        case Backend::avx2:
#if defined(SNTK_HAVE_AVX2)
            if (avx2_available()) return avx2_table();
#endif
            throw invalid_input("avx2 kernels not available on this cpu/build");
    }
    throw invalid_input("unknown simd backend");
}

Backend active_backend() {
    return active_table() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

void select_backend(Backend b) {
    g_active.store(&table_for(b), std::memory_order_release);
}

std::string_view backend_name(Backend b) {
    return b == Backend::scalar ? "scalar" : "avx2";
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_table()->dot(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active_table()->axpy(alpha, x, y, n);
}

void matvec(const double* rows, std::size_t nrows, std::size_t cols,
            const double* x, double* out) {
    active_table()->matvec(rows, nrows, cols, x, out);
}

}  // namespace sntk::simd
