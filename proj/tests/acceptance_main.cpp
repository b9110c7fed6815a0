// Acceptance suite: one check per shipped guarantee, one pass/fail line
// each, nonzero exit if anything fails. Tolerances are pinned here, not
// configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sntk/dataset.hpp"
#include "sntk/model.hpp"
#include "sntk/ntk.hpp"
#include "sntk/numerics.hpp"
#include "sntk/rng.hpp"
#include "sntk/theory.hpp"
#include "sntk/train.hpp"

using namespace sntk;

namespace {

struct Failure {
    std::string reason;
};

void require(bool ok, const std::string& reason) {
    if (!ok) throw Failure{reason};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double max_param_diff(const ModelState& a, const ModelState& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.W.size(); ++i)
        worst = std::max(worst, std::abs(a.W[i] - b.W[i]));
    for (std::size_t r = 0; r < a.m; ++r)
        worst = std::max(worst, std::abs(a.b[r] - b.b[r]));
    return worst;
}

double residual_norm(const std::vector<double>& f, const Dataset& data) {
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = f[i] - data.response(i);
        s += r * r;
    }
    return std::sqrt(s);
}

double ls_slope_tail(const std::vector<double>& loss_history) {
    const std::size_t len = loss_history.size();
    const std::size_t start = len / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t k = 0;
    for (std::size_t t = start; t < len; ++t) {
        require(loss_history[t] > 0.0, "loss hit zero inside the fit window");
        const double x = double(t), y = std::log(loss_history[t]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    return (double(k) * sxy - sx * sy) / (double(k) * sxx - sx * sx);
}

// Shared configuration for criteria 7, 8, 9, 11: toy linear data with a
// symmetric start and a conservatively small step.
struct ToyRun {
    Dataset data;
    ModelState model0;
    double lambda_hat;
    double eta;
};

ToyRun make_toy_run(double B, std::uint64_t seed) {
    Dataset data = gen_linear_teacher(5, 32, RngStream(seed, streams::data_points));
    ModelState model0 = init({InitKind::symmetric, B, seed + 1}, 2048, 5);
    const double lambda_hat =
        smallest_eigenvalue(empirical_ntk(model0, data), 1e-10);
    require(lambda_hat > 0.0, "empirical kernel not positive definite");
    const double eta = 0.1 * lambda_hat / (32.0 * 32.0);
    return ToyRun{std::move(data), std::move(model0), lambda_hat, eta};
}

// --- criteria ---------------------------------------------------------

void criterion_01_factorization() {
    RngStream pick(1001, streams::test_inputs);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t d = 2 + pick.next_u64() % 31;
        const std::size_t n = 4 + pick.next_u64() % 61;
        const std::size_t m = 64 + pick.next_u64() % 4033;
        const Dataset data =
            gen_linear_teacher(d, n, RngStream(2000 + std::uint64_t(rep), streams::data_points));
        const ModelState model =
            init({InitKind::standard, 0.25 * double(rep % 5), 3000 + std::uint64_t(rep)}, m, d);
        const SymMatrix h = empirical_ntk(model, data);
        const SymMatrix ztz = feature_matrix_Z(model, data).gram();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                require(std::abs(h(i, j) - ztz(i, j)) <= 1e-10,
                        "instance " + std::to_string(rep) + ": |H - Z^T Z| = " +
                            fmt(std::abs(h(i, j) - ztz(i, j))));
    }
}

void criterion_02_symmetric_zero_output() {
    const ModelState model = init({InitKind::symmetric, 0.5, 1101}, 4096, 8);
    RngStream rng(1102, streams::test_inputs);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(8);
        double norm_sq = 0.0;
        for (auto& v : x) {
            v = rng.next_gaussian();
            norm_sq += v * v;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& v : x) v *= inv;
        const double out = forward(model, x);
        require(std::abs(out) <= 1e-8,
                "|f(x)| = " + fmt(std::abs(out)) + " at input " + std::to_string(rep));
    }
}

void criterion_03_sparse_dense_equivalence() {
    const Dataset data =
        gen_linear_teacher(16, 32, RngStream(1201, streams::data_points));
    for (double B : {0.0, 1.0, 2.0}) {
        const ModelState m0 = init({InitKind::standard, B, 1202}, 4096, 16);
        TrainConfig cfg;
        cfg.eta = 1e-3;
        cfg.steps = 200;
        cfg.path = TrainPath::dense;
        const auto [dense_model, dtrace] = train(m0, data, cfg);
        cfg.path = TrainPath::sparse;
        const auto [sparse_model, strace] = train(m0, data, cfg);
        const double diff = max_param_diff(dense_model, sparse_model);
        require(diff <= 1e-12,
                "B = " + fmt(B) + ": max parameter difference " + fmt(diff));
    }
}

void criterion_04_init_sparsity() {
    double total = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        const ModelState model =
            init({InitKind::standard, 1.0, 1300 + std::uint64_t(seed)}, 8192, 16);
        const Dataset data = gen_linear_teacher(
            16, 16, RngStream(1400 + std::uint64_t(seed), streams::data_points));
        total += active_fraction(activation_mask(model, data));
    }
    const double mean = total / 20.0;
    require(std::abs(mean - 0.158655) <= 0.010,
            "mean activation fraction " + fmt(mean) + " vs 0.1587 +/- 0.010");
}

void criterion_05_pair_probability_oracle() {
    for (double c = -0.95; c <= 0.951; c += 0.05) {
        const double quad = pair_activation_probability(c, 0.0);
        const double closed =
            (3.14159265358979323846 - std::acos(std::clamp(c, -1.0, 1.0))) /
            (2.0 * 3.14159265358979323846);
        require(std::abs(quad - closed) <= 1e-6,
                "closed form at c = " + fmt(c) + ": diff " +
                    fmt(std::abs(quad - closed)));
    }
    RngStream rng(1501, streams::kernel_mc);
    const std::size_t k = 1000000;
    for (double c : {0.1, 0.3, 0.6, 0.9}) {
        for (double B : {0.5, 1.0, 2.0}) {
            const double s = std::sqrt(1.0 - c * c);
            std::size_t hits = 0;
            for (std::size_t t = 0; t < k; ++t) {
                const double g1 = rng.next_gaussian();
                const double g2 = rng.next_gaussian();
                if (g1 >= B && c * g1 + s * g2 >= B) ++hits;
            }
            const double mc = double(hits) / double(k);
            const double quad = pair_activation_probability(c, B);
            const double se = std::sqrt(quad * (1.0 - quad) / double(k));
            require(std::abs(mc - quad) <= 3.0 * se,
                    "MC mismatch at (c, B) = (" + fmt(c) + ", " + fmt(B) +
                        "): |diff| = " + fmt(std::abs(mc - quad)) + " > 3 SE = " +
                        fmt(3.0 * se));
        }
    }
}

void criterion_06_ntk_concentration() {
    const Dataset data =
        gen_orthonormal(16, 16, RngStream(1601, streams::data_points));
    const SymMatrix hinf = limiting_ntk_quadrature(data, 0.5);
    const double lambda_inf = smallest_eigenvalue(hinf, 1e-10);
    const double bound = ntk_concentration_bound(16, 16384, 0.5, 0.05);

    int fro_ok = 0, eig_ok = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const ModelState model =
            init({InitKind::standard, 0.5, 1700 + std::uint64_t(trial)}, 16384, 16);
        const SymMatrix h0 = empirical_ntk(model, data);
        double fro_sq = 0.0;
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = 0; j < 16; ++j) {
                const double d = h0(i, j) - hinf(i, j);
                fro_sq += d * d;
            }
        if (std::sqrt(fro_sq) <= bound) ++fro_ok;
        if (smallest_eigenvalue(h0, 1e-10) >= 0.75 * lambda_inf) ++eig_ok;
    }
    require(fro_ok >= 19, "Frobenius concentration held in only " +
                              std::to_string(fro_ok) + "/20 trials");
    require(eig_ok >= 19, "3/4-eigenvalue bound held in only " +
                              std::to_string(eig_ok) + "/20 trials");
}

void criterion_07_convergence_rate() {
    const ToyRun toy = make_toy_run(0.0, 1801);
    TrainConfig cfg;
    cfg.eta = toy.eta;
    cfg.steps = 500;
    const auto [model, trace] = train(toy.model0, toy.data, cfg);
    for (std::size_t t = 0; t + 1 < trace.loss_history.size(); ++t)
        require(trace.loss_history[t + 1] < trace.loss_history[t],
                "loss not strictly decreasing at step " + std::to_string(t));
    const double ratio = trace.loss_history.back() / trace.loss_history.front();
    const double allowed =
        std::pow(1.0 - toy.eta * toy.lambda_hat / 4.0, double(cfg.steps));
    require(ratio <= allowed, "loss ratio " + fmt(ratio) +
                                  " exceeds contraction bound " + fmt(allowed));
}

void criterion_08_equal_slopes() {
    const ToyRun base = make_toy_run(0.0, 1801);  // same data/seed as 07
    std::vector<double> slopes;
    for (double B : {0.0, 0.2, 0.4}) {
        const ModelState model0 = init({InitKind::symmetric, B, 1802}, 2048, 5);
        TrainConfig cfg;
        cfg.eta = base.eta;  // fixed step across B
        cfg.steps = 500;
        const auto [model, trace] = train(model0, base.data, cfg);
        const double slope = ls_slope_tail(trace.loss_history);
        require(slope < 0.0, "terminal slope not negative at B = " + fmt(B));
        slopes.push_back(-slope);
    }
    const double hi = *std::max_element(slopes.begin(), slopes.end());
    const double lo = *std::min_element(slopes.begin(), slopes.end());
    require(hi / lo <= 2.0,
            "terminal log-loss slopes spread by " + fmt(hi / lo) + "x > 2x");
}

void criterion_09_movement_bound() {
    const ToyRun toy = make_toy_run(0.0, 1801);
    TrainConfig cfg;
    cfg.eta = toy.eta;
    cfg.steps = 500;
    const auto [model, trace] = train(toy.model0, toy.data, cfg);
    const double res0 = residual_norm(forward_all(toy.model0, toy.data), toy.data);
    const double allowed = 8.0 * std::sqrt(32.0) * res0 /
                           (std::sqrt(double(toy.model0.m)) * 0.75 * toy.lambda_hat);
    const ParamDistance moved = trace.movement.back();
    require(moved.rw_max <= allowed, "max weight movement " + fmt(moved.rw_max) +
                                         " exceeds " + fmt(allowed));
    require(moved.rb_max <= allowed, "max bias movement " + fmt(moved.rb_max) +
                                         " exceeds " + fmt(allowed));
}

void criterion_10_flipping_bound() {
    for (double B = 0.0; B <= 3.001; B += 0.25) {
        for (double r : {1e-3, 1e-2, 1e-1}) {
            const double limit = B > 0.0 ? std::min(1.0 / B, 1.0) : 1.0;
            if (r > limit) continue;
            const double exact = flipping_prob_exact(r / 2, r / 2, B);
            const double bound = flipping_prob_bound(r / 2, r / 2, B, 1.32);
            require(exact <= bound, "exact " + fmt(exact) + " > bound " +
                                        fmt(bound) + " at (B, R) = (" + fmt(B) +
                                        ", " + fmt(r) + ")");
        }
    }
}

void criterion_11_activation_stability() {
    const ToyRun toy = make_toy_run(1.0, 1803);
    TrainConfig cfg;
    cfg.eta = toy.eta;
    cfg.steps = 500;
    cfg.track.masks = true;
    cfg.track.flips = true;
    const auto [model, trace] = train(toy.model0, toy.data, cfg);

    const FlippedStats flips = flipped_statistics(trace, toy.model0.m);
    for (std::size_t i = 0; i < toy.data.size(); ++i) {
        const double f0 = double(trace.active_counts[0][i]);
        require(f0 > 0.0, "example " + std::to_string(i) + " starts inactive");
        std::size_t worst = 0;
        for (const auto& counts : trace.active_counts)
            worst = std::max(worst, std::size_t(counts[i]));
        require(worst <= std::size_t(trace.active_counts[0][i]) +
                             flips.per_example[i],
                "activation-stability identity violated at example " +
                    std::to_string(i));
        double drift = 0.0;
        for (const auto& counts : trace.active_counts)
            drift = std::max(drift, std::abs(double(counts[i]) - f0) / f0);
        require(drift <= 0.10, "activation fraction drift " + fmt(drift) +
                                   " > 10% at example " + std::to_string(i));
    }
}

void criterion_12_restricted_eigenvalue() {
    // Orthonormal data at B = 0.
    {
        const Dataset data =
            gen_orthonormal(16, 8, RngStream(1901, streams::data_points));
        const double bound = restricted_eig_lower_bound(0.0, std::sqrt(2.0));
        require(std::abs(bound - 0.25) <= 1e-12,
                "orthonormal bound is " + fmt(bound) + ", expected 0.25");
        const SymMatrix hinf = limiting_ntk_quadrature(data, 0.0);
        const RegionSpec region = make_region(pair_prob_matrix(data, 0.0));
        const double est = restricted_min_eig_estimate(
            hinf, region, 10000, RngStream(1902, streams::region_sampling));
        require(est >= 0.25 - 1e-9,
                "sampled restricted minimum " + fmt(est) + " < 0.25");
    }
    // Separation-1 synthetic data at B = 0.
    {
        const double bound = restricted_eig_lower_bound(0.0, 1.0);
        require(std::abs(bound - 1.0 / 6.0) <= 1e-12,
                "delta=1 bound is " + fmt(bound) + ", expected 1/6");
        const Dataset data = gen_separated(
            16, 8, 1.0, RngStream(1903, streams::data_points), 100000);
        const SymMatrix hinf = limiting_ntk_quadrature(data, 0.0);
        const RegionSpec region = make_region(pair_prob_matrix(data, 0.0));
        const double est = restricted_min_eig_estimate(
            hinf, region, 10000, RngStream(1904, streams::region_sampling));
        require(est >= bound - 1e-9, "sampled restricted minimum " + fmt(est) +
                                         " < bound " + fmt(bound));
    }
}

void criterion_13_error_dynamics() {
    const Dataset data =
        gen_linear_teacher(5, 32, RngStream(2001, streams::data_points));
    const ModelState model0 = init({InitKind::symmetric, 0.5, 2002}, 16384, 5);
    const double lambda_hat =
        smallest_eigenvalue(empirical_ntk(model0, data), 1e-10);
    require(lambda_hat > 0.0, "kernel not positive definite");
    const double eta = 0.1 * lambda_hat / (32.0 * 32.0);

    TrainConfig cfg;
    cfg.eta = eta;
    cfg.steps = 200;
    cfg.track.residuals = true;
    const auto [model, trace] = train(model0, data, cfg);

    const SymMatrix hinf = limiting_ntk_quadrature(data, 0.5);
    const auto ek = error_dynamics_residual(trace, hinf, eta, data.responses());
    double y_norm = 0.0;
    for (double v : data.responses()) y_norm += v * v;
    y_norm = std::sqrt(y_norm);
    double worst = 0.0;
    for (double v : ek) worst = std::max(worst, v);
    require(worst / y_norm <= 0.1, "max |e(k)|/|y| = " + fmt(worst / y_norm));
}

void criterion_14_gradient_correctness() {
    const double h = 1e-5;
    int tested_total = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const std::size_t d = 4 + rep % 4;
        const Dataset data = gen_linear_teacher(
            d, 8, RngStream(2100 + std::uint64_t(rep), streams::data_points));
        ModelState model = init(
            {InitKind::standard, 0.2 + 0.1 * double(rep % 3),
             2200 + std::uint64_t(rep)},
            32, d);
        const Gradients g = gradients(model, data);
        for (std::size_t r = 0; r < model.m; ++r) {
            bool near_kink = false;
            for (std::size_t i = 0; i < data.size(); ++i) {
                double z = -model.b[r];
                for (std::size_t k = 0; k < d; ++k)
                    z += model.W[r * d + k] * data.column(i)[k];
                near_kink = near_kink || std::abs(z) <= 1e-3;
            }
            if (near_kink) continue;
            for (std::size_t k = 0; k < d; ++k) {
                const double saved = model.W[r * d + k];
                model.W[r * d + k] = saved + h;
                const double lp = loss(model, data);
                model.W[r * d + k] = saved - h;
                const double lm = loss(model, data);
                model.W[r * d + k] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = g.gW[r * d + k];
                if (std::abs(an) < 1e-7) continue;
                const double rel = std::abs(fd - an) / std::abs(an);
                require(rel <= 1e-5, "instance " + std::to_string(rep) +
                                         ": relative error " + fmt(rel));
                ++tested_total;
            }
        }
    }
    require(tested_total > 100, "too few kink-free coordinates tested");
}

void criterion_15_bench() {
    const Dataset data =
        gen_linear_teacher(16, 32, RngStream(2301, streams::data_points));
    const ModelState model0 = init({InitKind::standard, 2.5, 2302}, 65536, 16);
    const double eta = 1e-3;

    const ModelState dense_next = gd_step_dense(model0, data, eta);
    const auto [sparse_next, idx] =
        gd_step_sparse(model0, data, eta, build_active_index(model0, data));
    const double diff = max_param_diff(dense_next, sparse_next);
    require(diff <= 1e-12, "equality precheck failed: " + fmt(diff));

    const double dense_ns = bench_gd_step_ns(model0, data, eta, TrainPath::dense, 3);
    const double sparse_ns = bench_gd_step_ns(model0, data, eta, TrainPath::sparse, 3);
    require(sparse_ns < dense_ns,
            "sparse step (" + fmt(sparse_ns) + " ns) not faster than dense (" +
                fmt(dense_ns) + " ns)");
    std::printf("       [info] speedup %.1fx at active fraction %.4f\n",
                dense_ns / sparse_ns,
                active_fraction(activation_mask(model0, data)));
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double seconds_limit;  // 0 = no stated limit
        std::function<void()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "kernel factorization H = Z^T Z", 30.0, criterion_01_factorization},
        {2, "symmetric initialization outputs zero", 0.0, criterion_02_symmetric_zero_output},
        {3, "sparse/dense training equivalence", 120.0, criterion_03_sparse_dense_equivalence},
        {4, "initialization sparsity near Q(1)", 10.0, criterion_04_init_sparsity},
        {5, "pairwise probability oracle agreement", 60.0, criterion_05_pair_probability_oracle},
        {6, "kernel concentration and 3/4 eigenvalue", 120.0, criterion_06_ntk_concentration},
        {7, "linear convergence rate", 60.0, criterion_07_convergence_rate},
        {8, "equal terminal slopes across bias levels", 180.0, criterion_08_equal_slopes},
        {9, "weight/bias movement bound", 0.0, criterion_09_movement_bound},
        {10, "flipping probability bound", 1.0, criterion_10_flipping_bound},
        {11, "activation stability during training", 0.0, criterion_11_activation_stability},
        {12, "restricted least eigenvalue", 60.0, criterion_12_restricted_eigenvalue},
        {13, "error dynamics deviation", 180.0, criterion_13_error_dynamics},
        {14, "gradient correctness vs finite differences", 0.0, criterion_14_gradient_correctness},
        {15, "sparse step strictly faster", 0.0, criterion_15_bench},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string reason;
        try {
            c.run();
        } catch (const Failure& f) {
            reason = f.reason;
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (reason.empty() && c.seconds_limit > 0.0 && elapsed > c.seconds_limit)
            reason = "runtime " + fmt(elapsed) + " s exceeded the " +
                     fmt(c.seconds_limit) + " s limit";
        if (reason.empty()) {
            std::printf("[PASS] criterion %2d: %s (%.2f s)\n", c.id, c.name,
                        elapsed);
        } else {
            ++failures;
            std::printf("[FAIL] criterion %2d: %s -- %s\n", c.id, c.name,
                        reason.c_str());
        }
        std::fflush(stdout);
    }
    if (failures == 0)
        std::printf("all %zu acceptance criteria passed\n", criteria.size());
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
