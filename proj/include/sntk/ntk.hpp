#pragma once

#include <cstddef>
#include <string>

#include "sntk/dataset.hpp"
#include "sntk/model.hpp"
#include "sntk/numerics.hpp"
#include "sntk/rng.hpp"

namespace sntk {

/// Parameter-gradient feature matrix, m(d+1) x n, stored column-major.
/// Block r of column i is scale * I_{r,i} * a_r * (x_i, -1), so the Gram
/// matrix of the columns is the empirical NTK.
class FeatureMatrixZ {
public:
    FeatureMatrixZ(std::size_t m, std::size_t d, std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return n_; }
    const double* column(std::size_t i) const { return v_.data() + i * rows_; }
    double* column(std::size_t i) { return v_.data() + i * rows_; }

    double frobenius_norm() const;
    SymMatrix gram() const;  // Z^T Z by explicit column dot products

private:
    std::size_t rows_, n_;
    std::vector<double> v_;
};

/// Pairwise activation probabilities: diagonal Q(B), off-diagonal
/// Pr[w^T x_i >= B, w^T x_j >= B].
struct PairProbMatrix {
    SymMatrix probs;
    double p0() const { return probs(0, 0); }
    double min_offdiag() const;  // requires dim >= 2
};

/// H_ij = (<x_i,x_j> + 1) * (1/m) * #{r : I_{r,i} and I_{r,j}}.
SymMatrix empirical_ntk(const ModelState& model, const Dataset& data);
SymMatrix empirical_ntk_from_mask(const ActivationMask& mask,
                                  const Dataset& data);

FeatureMatrixZ feature_matrix_Z(const ModelState& model, const Dataset& data);

/// Pr[g1 >= B, c g1 + sqrt(1-c^2) g2 >= B] for independent standard normal
/// g1, g2, by composite Gauss-Legendre quadrature of
///   int_B^inf phi(t) Q((B - c t)/sqrt(1-c^2)) dt
/// on [B, B+12] with 512 nodes. |c| >= 1 - 1e-9 is routed to the limits:
/// c -> 1 gives Q(B); c -> -1 gives 0 (the B = 0 boundary event has
/// probability zero).
double pair_activation_probability(double c, double B);

/// Limiting kernel (<x_i,x_j> + 1) * pair_activation_probability(<x_i,x_j>, B);
/// requires exactly unit-norm columns.
SymMatrix limiting_ntk_quadrature(const Dataset& data, double B);

/// Monte Carlo estimate sharing one Gaussian draw per sample across all
/// entries, so the estimate is an average of PSD matrices.
SymMatrix limiting_ntk_mc(const Dataset& data, double B, std::size_t samples,
                          RngStream stream);

PairProbMatrix pair_prob_matrix(const Dataset& data, double B);

/// CSV: first line is the dimension, then n comma-separated rows.
void export_kernel_csv(const SymMatrix& k, const std::string& path);
/// JSON envelope {n, B, method, entries}.
void export_kernel_json(const SymMatrix& k, double B, const std::string& method,
                        const std::string& path);

}  // namespace sntk
