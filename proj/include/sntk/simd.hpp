#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace sntk::simd {

/// One backend's implementations of the arithmetic inner loops.
/// `matvec` computes out[r] = dot(rows + r*cols, x) for r in [0, nrows);
/// within a backend out[r] is bitwise equal to that backend's dot on the
/// same row, which the dense/sparse training paths rely on.
struct KernelTable {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*matvec)(const double* rows, std::size_t nrows, std::size_t cols,
                   const double* x, double* out);
};

enum class Backend { scalar, avx2 };

const KernelTable& scalar_table();

/// Table for a specific backend; throws invalid_input if the CPU or build
/// cannot run it.
const KernelTable& table_for(Backend b);

/// True when this build carries AVX2 kernels and the CPU reports AVX2+FMA.
bool avx2_available();

/// Backend in use for the free functions below. Defaults to the best
/// available; tests and the bench command may pin it explicitly.
Backend active_backend();
void select_backend(Backend b);

double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void matvec(const double* rows, std::size_t nrows, std::size_t cols,
            const double* x, double* out);

/// popcount(a & b) over nwords 64-bit words. Pure integer work; one scalar
/// implementation serves every backend.
std::size_t and_popcount(const std::uint64_t* a, const std::uint64_t* b,
                         std::size_t nwords);

std::string_view backend_name(Backend b);

}  // namespace sntk::simd
