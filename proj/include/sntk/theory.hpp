#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sntk/dataset.hpp"
#include "sntk/ntk.hpp"
#include "sntk/numerics.hpp"
#include "sntk/rng.hpp"
#include "sntk/train.hpp"

namespace sntk {

/// One evaluated bound: the inputs it was instantiated with, the bound
/// value, the measured quantity when there is one, and a verdict.
struct BoundEntry {
    std::vector<std::pair<std::string, double>> inputs;
    double bound = 0.0;
    std::optional<double> measured;
    std::string verdict;  // "pass" | "fail" | "n/a"
};

struct BoundsReport {
    std::map<std::string, BoundEntry> entries;

    void add(const std::string& key, BoundEntry entry) {
        entries[key] = std::move(entry);
    }
    bool all_pass() const;  // ignores "n/a"
    std::string to_json() const;
};

/// Coefficient cone from pairwise activation probabilities:
/// sum_{i!=j} a_i a_j p_ij >= (min off-diagonal p) * sum_{i!=j} a_i a_j.
struct RegionSpec {
    PairProbMatrix pairs;
    double min_offdiag = 0.0;
};

RegionSpec make_region(const PairProbMatrix& pairs);

/// Exact probability that a unit-norm pre-activation crosses the boundary
/// when (w, b) move by at most (Rw, Rb): Phi(B + Rw + Rb) - Phi(B - Rw - Rb).
double flipping_prob_exact(double rw, double rb, double B);

/// c * (Rw + Rb) * exp(-B^2/2); requires Rw + Rb <= min(1/B, 1) for B > 0
/// (throws domain_error naming the constraint otherwise).
double flipping_prob_bound(double rw, double rb, double B, double c);

/// 8 sqrt(n) * initial_residual_norm / (sqrt(m) * lam); the same expression
/// bounds both the weight and the bias movement radius.
double movement_bound(std::size_t n, double initial_residual_norm, std::size_t m,
                      double lam);

/// C * (n + n * (exp(-B^2/2) + 1/m) * log^3(2mn/delta)).
double initial_error_bound(std::size_t n, std::size_t m, double B, double delta,
                           double C);

/// 4n * exp(-B^2/4) * sqrt(log(n^2/delta) / m).
double ntk_concentration_bound(std::size_t n, std::size_t m, double B,
                               double delta);

/// 2m * exp(-B^2/2).
double activated_count_bound(std::size_t m, double B);

/// Restricted least-eigenvalue lower bound max(0, lambda') with
///   lambda' = p0_lb(B) - exp(-B^2/(2 - d^2/2)) * (pi - arctan(g(d)))/(2pi),
///   g(d) = d sqrt(1 - d^2/4) / (1 - d^2/2),
/// where p0_lb uses the anti-concentration branch 1/2 - B/sqrt(2pi) for all
/// B and adds the tail branch (1/B - 1/B^3) exp(-B^2/2)/sqrt(2pi) only for
/// B > 1 (it is negative or singular otherwise). delta_sep = sqrt(2) takes
/// the arctan(+inf) = pi/2 limit.
double restricted_eig_lower_bound(double B, double delta_sep);

bool region_membership(std::span<const double> a, const RegionSpec& region);

/// Sampling upper estimate of min_{|a|=1, a in R} a^T H a: folds each
/// Gaussian draw into the nonnegative orthant (always in R) and also tests
/// the raw signed direction through region_membership.
double restricted_min_eig_estimate(const SymMatrix& h, const RegionSpec& region,
                                   std::size_t samples, RngStream stream);

/// sqrt(y^T (Hinf + ridge I)^{-1} y * 32 * exp(-B^2/2) / n).
double generalization_bound(const SymMatrix& hinf, std::span<const double> y,
                            double B, std::size_t n, double ridge = 0.0);

/// The suppressed O(n^{-1/2}) remainder, reported with an explicit constant.
double generalization_remainder(std::size_t n, double C = 1.0);

/// Same as generalization_bound with constant 8 instead of 32.
double rademacher_leading_term(const SymMatrix& hinf, std::span<const double> y,
                               double B, std::size_t n, double ridge = 0.0);

/// |e(k)| per step for e(k) = (f(k) - y) + (I - eta Hinf)^k y, the deviation
/// of the residual from the pure kernel power iteration. Requires residual
/// tracking in the trace.
std::vector<double> error_dynamics_residual(const TrainTrace& trace,
                                            const SymMatrix& hinf, double eta,
                                            std::span<const double> y);

}  // namespace sntk
