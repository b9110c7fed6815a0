#include "sntk/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "sntk/errors.hpp"
#include "sntk/simd.hpp"

namespace sntk {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2Pi = 2.50662827463100050242;
}  // namespace

bool BoundsReport::all_pass() const {
    for (const auto& [key, entry] : entries)
        if (entry.verdict == "fail") return false;
    return true;
}

std::string BoundsReport::to_json() const {
    nlohmann::ordered_json doc;
    for (const auto& [key, entry] : entries) {
        nlohmann::ordered_json e;
        nlohmann::ordered_json inputs;
        for (const auto& [name, value] : entry.inputs) inputs[name] = value;
        e["inputs"] = std::move(inputs);
        e["bound"] = entry.bound;
        if (entry.measured)
            e["measured"] = *entry.measured;
        else
            e["measured"] = nullptr;
        e["verdict"] = entry.verdict;
        doc[key] = std::move(e);
    }
    return doc.dump(2);
}

RegionSpec make_region(const PairProbMatrix& pairs) {
    const double pmin = pairs.min_offdiag();
    if (!std::isfinite(pmin) || pmin < 0.0)
        throw invalid_input("make_region: min off-diagonal must be finite, >= 0");
    return RegionSpec{pairs, pmin};
}

double flipping_prob_exact(double rw, double rb, double B) {
    if (rw < 0.0 || rb < 0.0)
        throw invalid_input("flipping_prob_exact: radii must be >= 0");
    if (B < 0.0) throw invalid_input("flipping_prob_exact: B must be >= 0");
    const double r = rw + rb;
    return normal_cdf(B + r) - normal_cdf(B - r);
}

double flipping_prob_bound(double rw, double rb, double B, double c) {
    if (rw < 0.0 || rb < 0.0)
        throw invalid_input("flipping_prob_bound: radii must be >= 0");
    if (!(c > 0.0)) throw invalid_input("flipping_prob_bound: c must be > 0");
    const double r = rw + rb;
    const double limit = B > 0.0 ? std::min(1.0 / B, 1.0) : 1.0;
    if (r > limit)
        throw domain_error(
            "flipping_prob_bound: hypothesis Rw + Rb <= min(1/B, 1) violated");
    return c * r * std::exp(-0.5 * B * B);
}

double movement_bound(std::size_t n, double initial_residual_norm, std::size_t m,
                      double lam) {
    if (m < 1) throw invalid_input("movement_bound: m must be >= 1");
    if (!(lam > 0.0)) throw domain_error("movement_bound: lam must be > 0");
    return 8.0 * std::sqrt(double(n)) * initial_residual_norm /
           (std::sqrt(double(m)) * lam);
}

double initial_error_bound(std::size_t n, std::size_t m, double B, double delta,
                           double C) {
    if (!(delta > 0.0 && delta < 1.0))
        throw invalid_input("initial_error_bound: delta must be in (0,1)");
    const double lg = std::log(2.0 * double(m) * double(n) / delta);
    return C * (double(n) + double(n) *
                                (std::exp(-0.5 * B * B) + 1.0 / double(m)) *
                                lg * lg * lg);
}

double ntk_concentration_bound(std::size_t n, std::size_t m, double B,
                               double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw invalid_input("ntk_concentration_bound: delta must be in (0,1)");
    return 4.0 * double(n) * std::exp(-0.25 * B * B) *
           std::sqrt(std::log(double(n) * double(n) / delta) / double(m));
}

double activated_count_bound(std::size_t m, double B) {
    if (m < 1) throw invalid_input("activated_count_bound: m must be >= 1");
    return 2.0 * double(m) * std::exp(-0.5 * B * B);
}

double restricted_eig_lower_bound(double B, double delta_sep) {
    if (B < 0.0) throw invalid_input("restricted_eig_lower_bound: B must be >= 0");
    if (!(delta_sep >= 0.0 && delta_sep <= std::sqrt(2.0) + 1e-12))
        throw domain_error(
            "restricted_eig_lower_bound: delta_sep must lie in [0, sqrt(2)]");

    double p0_lb = 0.5 - B / kSqrt2Pi;
    if (B > 1.0) {
        const double tail =
            (1.0 / B - 1.0 / (B * B * B)) * std::exp(-0.5 * B * B) / kSqrt2Pi;
        p0_lb = std::max(p0_lb, tail);
    }
    const double half_sq = 0.5 * delta_sep * delta_sep;
    // atan2 realizes the arctan(+inf) = pi/2 limit at delta_sep = sqrt(2).
    const double angle = std::atan2(
        delta_sep * std::sqrt(std::max(0.0, 1.0 - 0.25 * delta_sep * delta_sep)),
        1.0 - half_sq);
    const double subtracted =
        std::exp(-B * B / (2.0 - half_sq)) * (kPi - angle) / (2.0 * kPi);
    return std::max(0.0, p0_lb - subtracted);
}

bool region_membership(std::span<const double> a, const RegionSpec& region) {
    const std::size_t n = region.pairs.probs.dim();
    if (a.size() != n)
        throw dimension_mismatch("region_membership: vector length != region dim");

    double lhs = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double prod = a[i] * a[j];
            lhs += 2.0 * prod * region.pairs.probs(i, j);
            cross += 2.0 * prod;
        }
    const double rhs = region.min_offdiag * cross;
    const double slack =
        1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return lhs >= rhs - slack;
}

double restricted_min_eig_estimate(const SymMatrix& h, const RegionSpec& region,
                                   std::size_t samples, RngStream stream) {
    if (samples < 1)
        throw invalid_input("restricted_min_eig_estimate: samples must be >= 1");
    const std::size_t n = h.dim();
    if (region.pairs.probs.dim() != n)
        throw dimension_mismatch("restricted_min_eig_estimate: region dim != H dim");

    const auto quad = [&](std::span<const double> a) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < n; ++j) row += h(i, j) * a[j];
            s += a[i] * row;
        }
        return s;
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> g(n), cand(n);
    bool found = false;
    for (std::size_t k = 0; k < samples; ++k) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = stream.next_gaussian();
            norm_sq += g[i] * g[i];
        }
        if (norm_sq == 0.0) continue;
        const double inv = 1.0 / std::sqrt(norm_sq);

        // Folded draw: nonnegative entries, always inside the region.
        for (std::size_t i = 0; i < n; ++i) cand[i] = std::abs(g[i]) * inv;
        best = std::min(best, quad(cand));
        found = true;

        // Raw signed direction, kept only when it satisfies the membership
        // inequality.
        for (std::size_t i = 0; i < n; ++i) cand[i] = g[i] * inv;
        if (region_membership(cand, region)) best = std::min(best, quad(cand));
    }
    if (!found)
        throw internal_error("restricted_min_eig_estimate: no sample in region");
    return best;
}

double generalization_bound(const SymMatrix& hinf, std::span<const double> y,
                            double B, std::size_t n, double ridge) {
    if (n == 0 || y.size() != n)
        throw dimension_mismatch("generalization_bound: |y| must equal n");
    const double q = quadratic_form_inverse(hinf, y, ridge);
    return std::sqrt(q * 32.0 * std::exp(-0.5 * B * B) / double(n));
}

double generalization_remainder(std::size_t n, double C) {
    if (n == 0) throw invalid_input("generalization_remainder: n must be >= 1");
    return C / std::sqrt(double(n));
}

double rademacher_leading_term(const SymMatrix& hinf, std::span<const double> y,
                               double B, std::size_t n, double ridge) {
    if (n == 0 || y.size() != n)
        throw dimension_mismatch("rademacher_leading_term: |y| must equal n");
    const double q = quadratic_form_inverse(hinf, y, ridge);
    return std::sqrt(q * 8.0 * std::exp(-0.5 * B * B) / double(n));
}

std::vector<double> error_dynamics_residual(const TrainTrace& trace,
                                            const SymMatrix& hinf, double eta,
                                            std::span<const double> y) {
    if (!trace.tracked.residuals)
        throw missing_data("error_dynamics_residual: trace has no residuals");
    const std::size_t n = hinf.dim();
    if (y.size() != n || trace.examples != n)
        throw dimension_mismatch("error_dynamics_residual: dimension mismatch");

    std::vector<double> power(y.begin(), y.end());  // (I - eta Hinf)^k y
    std::vector<double> hv(n);
    std::vector<double> out;
    out.reserve(trace.residuals.size());
    for (std::size_t k = 0; k < trace.residuals.size(); ++k) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = trace.residuals[k][i] + power[i];
            norm_sq += e * e;
        }
        out.push_back(std::sqrt(norm_sq));
        for (std::size_t i = 0; i < n; ++i)
            hv[i] = simd::dot(&hinf.data()[i * n], power.data(), n);
        for (std::size_t i = 0; i < n; ++i) power[i] -= eta * hv[i];
    }
    return out;
}

}  // namespace sntk
