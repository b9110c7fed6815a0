#include "sntk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sntk/errors.hpp"
#include "sntk/simd.hpp"

namespace sntk {

namespace {

void require_finite(const SymMatrix& m, const char* op) {
    for (double v : m.data())
        if (!std::isfinite(v))
            throw invalid_input(std::string(op) + ": non-finite matrix entry");
}

double offdiag_norm_sq(const std::vector<double>& a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) s += a[i * n + j] * a[i * n + j];
    return 2.0 * s;
}

}  // namespace

SymMatrix::SymMatrix(std::size_t n) : n_(n), e_(n * n, 0.0) {
    if (n < 1) throw invalid_input("SymMatrix: dimension must be >= 1");
}

SymMatrix SymMatrix::from_rowmajor(std::size_t n, std::span<const double> entries) {
    if (entries.size() != n * n)
        throw dimension_mismatch("SymMatrix::from_rowmajor: wrong entry count");
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (entries[i * n + j] != entries[j * n + i])
                throw invalid_input("SymMatrix::from_rowmajor: entries not symmetric");
            m.e_[i * n + j] = entries[i * n + j];
        }
    return m;
}

void SymMatrix::add_scaled_identity(double ridge) {
    for (std::size_t i = 0; i < n_; ++i) e_[i * n_ + i] += ridge;
}

std::vector<double> eigenvalues(const SymMatrix& m, double tol) {
    if (!(tol > 0.0)) throw invalid_input("eigenvalues: tol must be > 0");
    require_finite(m, "eigenvalues");

    const std::size_t n = m.dim();
    std::vector<double> a = m.data();
    if (n == 1) return {a[0]};

    // Off-diagonal Frobenius norm bounds the eigenvalue error (Weyl), so
    // sweeping until off(A) <= tol/2 puts each diagonal entry within tol/2
    // of an eigenvalue.
    const double target_sq = 0.25 * tol * tol;
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm_sq(a, n) <= target_sq) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                // Smaller-magnitude tangent root keeps the rotation stable.
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    if (offdiag_norm_sq(a, n) > target_sq)
        throw internal_error("eigenvalues: jacobi sweeps did not converge");

    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

double smallest_eigenvalue(const SymMatrix& m, double tol) {
    return eigenvalues(m, tol).front();
}

double spectral_norm(const SymMatrix& m, double tol) {
    const auto ev = eigenvalues(m, tol);
    return std::max(std::abs(ev.front()), std::abs(ev.back()));
}

double frobenius_norm(const SymMatrix& m) {
    require_finite(m, "frobenius_norm");
    const auto& e = m.data();
    double s = simd::dot(e.data(), e.data(), e.size());
    return std::sqrt(s);
}

double quadratic_form_inverse(const SymMatrix& m, std::span<const double> y,
                              double ridge) {
    const std::size_t n = m.dim();
    if (y.size() != n)
        throw dimension_mismatch("quadratic_form_inverse: vector length != dim");
    if (ridge < 0.0) throw invalid_input("quadratic_form_inverse: ridge must be >= 0");
    require_finite(m, "quadratic_form_inverse");

    // In-place lower Cholesky of M + ridge I.
    std::vector<double> a = m.data();
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += ridge;
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j] - simd::dot(&a[j * n], &a[j * n], j);
        if (!(diag > 0.0))
            throw singular_matrix(
                "quadratic_form_inverse: matrix not positive definite at pivot " +
                    std::to_string(j),
                j);
        diag = std::sqrt(diag);
        a[j * n + j] = diag;
        for (std::size_t i = j + 1; i < n; ++i)
            a[i * n + j] = (a[i * n + j] - simd::dot(&a[i * n], &a[j * n], j)) / diag;
    }

    // Solve L z = y; then y^T (L L^T)^{-1} y = ||z||^2.
    std::vector<double> z(y.begin(), y.end());
    for (std::size_t i = 0; i < n; ++i)
        z[i] = (z[i] - simd::dot(&a[i * n], z.data(), i)) / a[i * n + i];
    return simd::dot(z.data(), z.data(), n);
}

std::vector<double> gaussian_sample(RngStream& stream, std::size_t count) {
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = stream.next_gaussian();
    return out;
}

// Rational approximations over three ranges, coefficients from W. J. Cody,
// "Rational Chebyshev approximation for the error function" (as used by
// netlib ERF). Relative error below 1e-13 in double precision.
double erfc_cody(double x) {
    static const double pa[5] = {3.16112374387056560e+00, 1.13864154151050156e+02,
                                 3.77485237685302021e+02, 3.20937758913846947e+03,
                                 1.85777706184603153e-01};
    static const double qa[4] = {2.36012909523441209e+01, 2.44024637934444173e+02,
                                 1.28261652607737228e+03, 2.84423683343917062e+03};
    static const double pb[9] = {5.64188496988670089e-01, 8.88314979438837594e+00,
                                 6.61191906371416295e+01, 2.98635138197400131e+02,
                                 8.81952221241769090e+02, 1.71204761263407058e+03,
                                 2.05107837782607147e+03, 1.23033935479799725e+03,
                                 2.15311535474403846e-08};
    static const double qb[8] = {1.57449261107098347e+01, 1.17693950891312499e+02,
                                 5.37181101862009858e+02, 1.62138957456669019e+03,
                                 3.29079923573345963e+03, 4.36261909014324716e+03,
                                 3.43936767414372164e+03, 1.23033935480374942e+03};
    static const double pc[6] = {3.05326634961232344e-01, 3.60344899949804439e-01,
                                 1.25781726111229246e-01, 1.60837851487422766e-02,
                                 6.58749161529837803e-04, 1.63153871373020978e-02};
    static const double qc[5] = {2.56852019228982242e+00, 1.87295284992346047e+00,
                                 5.27905102951428412e-01, 6.05183413124413191e-02,
                                 2.33520497626869185e-03};
    const double inv_sqrt_pi = 5.64189583547756287e-01;

    const double ax = std::abs(x);
    double result;
    if (ax <= 0.46875) {
        // erf via R(x^2); erfc = 1 - erf.
        const double z = ax * ax;
        double num = pa[4] * z;
        double den = z;
        for (int i = 0; i < 3; ++i) {
            num = (num + pa[i]) * z;
            den = (den + qa[i]) * z;
        }
        const double erf_val = x * (num + pa[3]) / (den + qa[3]);
        return 1.0 - erf_val;
    } else if (ax <= 4.0) {
        double num = pb[8] * ax;
        double den = ax;
        for (int i = 0; i < 7; ++i) {
            num = (num + pb[i]) * ax;
            den = (den + qb[i]) * ax;
        }
        result = (num + pb[7]) / (den + qb[7]);
        const double z = std::floor(ax * 16.0) / 16.0;
        result *= std::exp(-z * z) * std::exp(-(ax - z) * (ax + z));
    } else {
        const double z = 1.0 / (ax * ax);
        double num = pc[5] * z;
        double den = z;
        for (int i = 0; i < 4; ++i) {
            num = (num + pc[i]) * z;
            den = (den + qc[i]) * z;
        }
        result = z * (num + pc[4]) / (den + qc[4]);
        result = (inv_sqrt_pi - result) / ax;
        const double zz = std::floor(ax * 16.0) / 16.0;
        result *= std::exp(-zz * zz) * std::exp(-(ax - zz) * (ax + zz));
    }
    return x < 0.0 ? 2.0 - result : result;
}

double normal_cdf(double x) { return 0.5 * erfc_cody(-x * 0.70710678118654752440); }

double normal_upper_tail(double x) {
    return 0.5 * erfc_cody(x * 0.70710678118654752440);
}

}  // namespace sntk
