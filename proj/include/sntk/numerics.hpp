#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sntk/rng.hpp"

namespace sntk {

/// Dense symmetric matrix, row-major, symmetry bit-exact by construction:
/// every write goes through set(), which stores (i,j) and (j,i) from the
/// same double.
class SymMatrix {
public:
    explicit SymMatrix(std::size_t n);

    /// Validates exact symmetry of `entries` (n*n, row-major).
    static SymMatrix from_rowmajor(std::size_t n, std::span<const double> entries);

    std::size_t dim() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return e_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        e_[i * n_ + j] = v;
        e_[j * n_ + i] = v;
    }
    const std::vector<double>& data() const { return e_; }

    void add_scaled_identity(double ridge);

private:
    std::size_t n_;
    std::vector<double> e_;
};

/// All eigenvalues by cyclic Jacobi rotations, ascending. Deterministic
/// row-cyclic sweep order; stops when the off-diagonal Frobenius norm is
/// below tol.
std::vector<double> eigenvalues(const SymMatrix& m, double tol);

double smallest_eigenvalue(const SymMatrix& m, double tol);

/// Largest |eigenvalue|.
double spectral_norm(const SymMatrix& m, double tol);

double frobenius_norm(const SymMatrix& m);

/// y^T (M + ridge I)^{-1} y via Cholesky. Throws singular_matrix (with the
/// pivot index) when M + ridge I is not positive definite.
double quadratic_form_inverse(const SymMatrix& m, std::span<const double> y,
                              double ridge);

/// `count` i.i.d. standard normal draws from the stream's current position.
std::vector<double> gaussian_sample(RngStream& stream, std::size_t count);

/// Self-contained complementary error function (rational approximations in
/// the style of Cody's ERF/ERFC, |rel err| < 1e-13); the normal CDF and
/// upper tail below are defined through it so results match across builds.
double erfc_cody(double x);
double normal_cdf(double x);              // Phi(x)
double normal_upper_tail(double x);       // Q(x) = 1 - Phi(x)

}  // namespace sntk
