#include "sntk/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fcntl.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <unistd.h>

#include "json.hpp"

#include "sntk/errors.hpp"
#include "sntk/ntk.hpp"
#include "sntk/simd.hpp"
#include "sntk/svg.hpp"
#include "sntk/theory.hpp"

namespace sntk {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

/// Exclusive .lock file in the output directory for the run's duration.
class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw io_error("output: cannot create directory " + dir);
        lock_path_ = (fs::path(dir_) / ".lock").string();
        fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw io_error("output: directory " + dir +
                           " is locked by another run (stale .lock?)");
    }
    ~OutputDir() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(lock_path_.c_str());
        }
    }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    std::string file(const std::string& name) const {
        return (fs::path(dir_) / name).string();
    }

private:
    std::string dir_;
    std::string lock_path_;
    int fd_ = -1;
};

void write_json_file(const ojson& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw io_error("write failed for " + path);
}

double frobenius_diff(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim())
        throw dimension_mismatch("frobenius_diff: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j) {
            const double d = a(i, j) - b(i, j);
            s += d * d;
        }
    return std::sqrt(s);
}

/// Least-squares slope of ln(loss) vs step over the terminal half of the
/// trace; 0 when the window degenerates.
double fitted_log_rate(const std::vector<double>& loss_history) {
    const std::size_t len = loss_history.size();
    if (len < 2) return 0.0;
    const std::size_t start = len / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t k = 0;
    for (std::size_t t = start; t < len; ++t) {
        if (!(loss_history[t] > 0.0)) return 0.0;
        const double x = double(t);
        const double y = std::log(loss_history[t]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    const double denom = double(k) * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return (double(k) * sxy - sx * sy) / denom;
}

SymMatrix limiting_kernel(const ExperimentConfig& cfg, const Dataset& data) {
    if (cfg.ntk.method == "mc")
        return limiting_ntk_mc(data, cfg.model.B, cfg.ntk.mc_samples,
                               RngStream(cfg.seed, streams::kernel_mc));
    return limiting_ntk_quadrature(data, cfg.model.B);
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg) {
    OutputDir out(cfg.output.dir);
    const Dataset data = make_dataset(cfg);
    const ModelState model0 = make_model(cfg, data.dim());

    TrainConfig tc;
    tc.eta = cfg.train.eta;
    tc.steps = cfg.train.steps;
    tc.path = cfg.train.path;
    tc.track.masks = true;
    auto [model, trace] = train(model0, data, tc);

    export_trace_csv(trace, out.file("trace.csv"));
    save_checkpoint(model, out.file("checkpoint.bin"));

    const double lambda_hat =
        smallest_eigenvalue(empirical_ntk(model0, data), 1e-10);
    ojson summary;
    summary["final_loss"] = trace.loss_history.back();
    summary["fitted_log_rate"] = fitted_log_rate(trace.loss_history);
    summary["lambda_hat"] = lambda_hat;
    write_json_file(summary, out.file("summary.json"));

    if (cfg.wants_format("svg"))
        write_svg_chart(out.file("loss.svg"), "training loss",
                        {{"loss", "#1f77b4", trace.loss_history}}, true);
    return exit_code::success;
}

int cmd_sparsity(const ExperimentConfig& cfg) {
    OutputDir out(cfg.output.dir);
    const Dataset data = make_dataset(cfg);
    const ModelState model0 = make_model(cfg, data.dim());

    TrainConfig tc;
    tc.eta = cfg.train.eta;
    tc.steps = cfg.train.steps;
    tc.path = cfg.train.path;
    tc.track.masks = true;
    auto [model, trace] = train(model0, data, tc);

    const double m = double(trace.neurons);
    const std::size_t n = trace.examples;
    std::vector<double> mean_fraction(trace.active_counts.size());

    // Per-example relative drift from the step-0 fraction; an example that
    // starts inactive only drifts if it ever activates.
    double max_rel_drift = 0.0;
    for (std::size_t t = 0; t < trace.active_counts.size(); ++t) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f0 = double(trace.active_counts[0][i]) / m;
            const double ft = double(trace.active_counts[t][i]) / m;
            mean += ft;
            if (f0 > 0.0)
                max_rel_drift = std::max(max_rel_drift, std::abs(ft - f0) / f0);
            else if (ft > 0.0)
                max_rel_drift = std::numeric_limits<double>::infinity();
        }
        mean_fraction[t] = mean / double(n);
    }

    {
        std::ofstream csv(out.file("sparsity.csv"));
        if (!csv) throw io_error("cannot open sparsity csv");
        csv << "step,mean_fraction,min_fraction,max_fraction\n";
        char buf[40];
        for (std::size_t t = 0; t < trace.active_counts.size(); ++t) {
            std::uint32_t lo = trace.active_counts[t][0], hi = lo;
            for (std::uint32_t c : trace.active_counts[t]) {
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            csv << t << ",";
            std::snprintf(buf, sizeof buf, "%.17g", mean_fraction[t]);
            csv << buf << ",";
            std::snprintf(buf, sizeof buf, "%.17g", double(lo) / m);
            csv << buf << ",";
            std::snprintf(buf, sizeof buf, "%.17g", double(hi) / m);
            csv << buf << "\n";
        }
    }

    const bool pass = max_rel_drift <= cfg.bounds.sparsity_max_drift;
    ojson summary;
    summary["initial_fraction"] = mean_fraction.front();
    summary["final_fraction"] = mean_fraction.back();
    summary["max_rel_drift"] =
        std::isfinite(max_rel_drift) ? ojson(max_rel_drift) : ojson("inf");
    summary["max_drift_allowed"] = cfg.bounds.sparsity_max_drift;
    summary["verdict"] = pass ? "pass" : "fail";
    write_json_file(summary, out.file("summary.json"));

    if (cfg.wants_format("svg"))
        write_svg_chart(out.file("sparsity.svg"), "activation fraction",
                        {{"mean fraction", "#d62728", mean_fraction}}, false);
    return pass ? exit_code::success : exit_code::verdict;
}

int cmd_ntk(const ExperimentConfig& cfg) {
    if (cfg.ntk.method == "mc" && cfg.ntk.mc_samples < 1)
        throw invalid_input("ntk: mc_samples must be >= 1");
    OutputDir out(cfg.output.dir);
    const Dataset data = make_dataset(cfg);
    const ModelState model0 = make_model(cfg, data.dim());

    const SymMatrix h0 = empirical_ntk(model0, data);
    const SymMatrix hinf = limiting_kernel(cfg, data);

    export_kernel_csv(h0, out.file("kernel_empirical.csv"));
    export_kernel_csv(hinf, out.file("kernel_limit.csv"));
    export_kernel_json(h0, cfg.model.B, "empirical",
                       out.file("kernel_empirical.json"));
    export_kernel_json(hinf, cfg.model.B, cfg.ntk.method,
                       out.file("kernel_limit.json"));

    const double fro = frobenius_diff(h0, hinf);
    const double bound = ntk_concentration_bound(data.size(), model0.m,
                                                 cfg.model.B, cfg.bounds.delta);
    ojson summary;
    summary["n"] = data.size();
    summary["m"] = model0.m;
    summary["B"] = cfg.model.B;
    summary["method"] = cfg.ntk.method;
    summary["fro_diff"] = fro;
    summary["lambda_min_empirical"] = smallest_eigenvalue(h0, 1e-10);
    summary["lambda_min_limit"] = smallest_eigenvalue(hinf, 1e-10);
    summary["concentration_bound"] = bound;
    summary["verdict"] = fro <= bound ? "pass" : "fail";
    write_json_file(summary, out.file("summary.json"));
    return exit_code::success;
}

namespace {

BoundEntry make_entry(std::vector<std::pair<std::string, double>> inputs,
                      double bound, std::optional<double> measured,
                      const std::string& verdict) {
    BoundEntry e;
    e.inputs = std::move(inputs);
    e.bound = bound;
    e.measured = measured;
    e.verdict = verdict;
    return e;
}

std::string pass_fail(bool ok) { return ok ? "pass" : "fail"; }

}  // namespace

int cmd_bounds(const ExperimentConfig& cfg) {
    OutputDir out(cfg.output.dir);
    const Dataset data = make_dataset(cfg);
    const ModelState model0 = make_model(cfg, data.dim());
    const std::size_t n = data.size();
    const std::size_t m = model0.m;
    const double B = cfg.model.B;
    const double delta = cfg.bounds.delta;

    TrainConfig tc;
    tc.eta = cfg.train.eta;
    tc.steps = cfg.train.steps;
    tc.path = cfg.train.path;
    tc.track.masks = true;
    tc.track.flips = true;
    tc.track.residuals = true;
    auto [model, trace] = train(model0, data, tc);

    const SymMatrix h0 = empirical_ntk(model0, data);
    const double lambda_hat = smallest_eigenvalue(h0, 1e-10);
    const SymMatrix hinf = limiting_kernel(cfg, data);
    const double lambda_inf = smallest_eigenvalue(hinf, 1e-10);

    BoundsReport report;

    // Kernel concentration and the 3/4 eigenvalue consequence.
    report.add("ntk_concentration",
               make_entry({{"n", double(n)}, {"m", double(m)}, {"B", B},
                           {"delta", delta}},
                          ntk_concentration_bound(n, m, B, delta),
                          frobenius_diff(h0, hinf),
                          pass_fail(frobenius_diff(h0, hinf) <=
                                    ntk_concentration_bound(n, m, B, delta))));
    report.add("ntk_eig_threequarters",
               make_entry({{"lambda_limit", lambda_inf}}, 0.75 * lambda_inf,
                          lambda_hat, pass_fail(lambda_hat >= 0.75 * lambda_inf)));

    // Initial error against the calibrated constant.
    const double initial_residual_sq = 2.0 * trace.loss_history.front();
    const double init_bound =
        initial_error_bound(n, m, B, delta, cfg.bounds.initial_error_C);
    report.add("initial_error",
               make_entry({{"n", double(n)}, {"m", double(m)}, {"B", B},
                           {"delta", delta}, {"C", cfg.bounds.initial_error_C}},
                          init_bound, initial_residual_sq,
                          pass_fail(initial_residual_sq <= init_bound)));

    // Movement radii with the 3/4 concentration factor.
    const ParamDistance moved = trace.movement.back();
    const double move_bound =
        movement_bound(n, std::sqrt(initial_residual_sq), m, 0.75 * lambda_hat);
    report.add("movement_dw",
               make_entry({{"n", double(n)}, {"m", double(m)},
                           {"lambda", 0.75 * lambda_hat}},
                          move_bound, moved.rw_max,
                          pass_fail(moved.rw_max <= move_bound)));
    report.add("movement_db",
               make_entry({{"n", double(n)}, {"m", double(m)},
                           {"lambda", 0.75 * lambda_hat}},
                          move_bound, moved.rb_max,
                          pass_fail(moved.rb_max <= move_bound)));

    // Flipping probability and flipped-neuron counts at the measured radii.
    const double radius = moved.rw_max + moved.rb_max;
    const bool radius_admissible =
        radius <= (B > 0.0 ? std::min(1.0 / B, 1.0) : 1.0);
    if (radius_admissible) {
        const double fp_bound =
            flipping_prob_bound(moved.rw_max, moved.rb_max, B, cfg.bounds.flipping_c);
        const double fp_exact = flipping_prob_exact(moved.rw_max, moved.rb_max, B);
        report.add("flipping_prob",
                   make_entry({{"Rw", moved.rw_max}, {"Rb", moved.rb_max},
                               {"B", B}, {"c", cfg.bounds.flipping_c}},
                              fp_bound, fp_exact, pass_fail(fp_exact <= fp_bound)));
        const FlippedStats flips = flipped_statistics(trace, m);
        const double flip_count_bound =
            2.0 * double(m) * cfg.bounds.flipping_c * radius *
            std::exp(-0.5 * B * B);
        report.add("flipped_count",
                   make_entry({{"m", double(m)}, {"R", radius}, {"B", B},
                               {"c", cfg.bounds.flipping_c}},
                              flip_count_bound, double(flips.max),
                              pass_fail(double(flips.max) <= flip_count_bound)));
    } else {
        report.add("flipping_prob",
                   make_entry({{"Rw", moved.rw_max}, {"Rb", moved.rb_max}, {"B", B}},
                              0.0, {}, "n/a"));
        report.add("flipped_count",
                   make_entry({{"m", double(m)}, {"R", radius}, {"B", B}}, 0.0, {},
                              "n/a"));
    }

    // Activated neurons at initialization.
    std::size_t max_active0 = 0;
    for (std::uint32_t c : trace.active_counts.front())
        max_active0 = std::max<std::size_t>(max_active0, c);
    report.add("activated_count",
               make_entry({{"m", double(m)}, {"B", B}}, activated_count_bound(m, B),
                          double(max_active0),
                          pass_fail(double(max_active0) <=
                                    activated_count_bound(m, B))));

    // Per-run contraction against (1 - eta lambda/4)^T.
    const double contraction =
        std::pow(std::max(0.0, 1.0 - cfg.train.eta * lambda_hat / 4.0),
                 double(cfg.train.steps));
    const double loss0 = trace.loss_history.front();
    const double lossT = trace.loss_history.back();
    const bool conv_ok = loss0 == 0.0 ? lossT == 0.0 : lossT <= contraction * loss0;
    report.add("convergence_rate",
               make_entry({{"eta", cfg.train.eta}, {"lambda_hat", lambda_hat},
                           {"steps", double(cfg.train.steps)}},
                          contraction * loss0, lossT, pass_fail(conv_ok)));

    // Region-restricted least eigenvalue.
    if (n >= 2) {
        const double sep = data_separation(data);
        const double eig_bound =
            restricted_eig_lower_bound(B, std::min(sep, std::sqrt(2.0)));
        const RegionSpec region = make_region(pair_prob_matrix(data, B));
        const double eig_est = restricted_min_eig_estimate(
            hinf, region, 10000, RngStream(cfg.seed, streams::region_sampling));
        report.add("restricted_eig_lower",
                   make_entry({{"B", B}, {"delta_sep", sep}}, eig_bound, eig_est,
                              pass_fail(eig_est >= eig_bound - 1e-9)));
    } else {
        report.add("restricted_eig_lower", make_entry({{"B", B}}, 0.0, {}, "n/a"));
    }

    // Generalization quantities (informational; the remainder term
    // carries an unpinned constant).
    try {
        const double gen = generalization_bound(hinf, data.responses(), B, n);
        report.add("generalization_leading",
                   make_entry({{"B", B}, {"n", double(n)}}, gen, {}, "n/a"));
        report.add("rademacher_leading",
                   make_entry({{"B", B}, {"n", double(n)}},
                              rademacher_leading_term(hinf, data.responses(), B, n),
                              {}, "n/a"));
    } catch (const singular_matrix&) {
        report.add("generalization_leading",
                   make_entry({{"B", B}}, 0.0, {}, "n/a"));
    }

    // Error-dynamics deviation; only meaningful when f(0) = 0.
    if (cfg.model.init == InitKind::symmetric && cfg.train.eta > 0.0) {
        const std::vector<double> ek =
            error_dynamics_residual(trace, hinf, cfg.train.eta, data.responses());
        double y_norm = 0.0;
        for (double v : data.responses()) y_norm += v * v;
        y_norm = std::sqrt(y_norm);
        double worst = 0.0;
        for (double v : ek) worst = std::max(worst, v);
        const double rel = y_norm > 0.0 ? worst / y_norm : 0.0;
        report.add("error_dynamics",
                   make_entry({{"eta", cfg.train.eta}, {"steps", double(cfg.train.steps)}},
                              0.1, rel, pass_fail(rel <= 0.1)));
    } else {
        report.add("error_dynamics", make_entry({}, 0.1, {}, "n/a"));
    }

    // Z(0) Frobenius norm against 8n exp(-B^2/2).
    const FeatureMatrixZ z0 = feature_matrix_Z(model0, data);
    const double zfro_sq = z0.frobenius_norm() * z0.frobenius_norm();
    const double zfro_bound = 8.0 * double(n) * std::exp(-0.5 * B * B);
    report.add("zfro_init",
               make_entry({{"n", double(n)}, {"B", B}}, zfro_bound, zfro_sq,
                          pass_fail(zfro_sq <= zfro_bound)));

    // Stability of lambda_min(Hinf(B)) * exp(B^2/2) across B: reported, not
    // judged, since the proportionality constant is external to this code.
    {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double b2 : {0.0, 0.5, 1.0, 1.5}) {
            const double lam =
                smallest_eigenvalue(limiting_ntk_quadrature(data, b2), 1e-10);
            const double scaled = lam * std::exp(0.5 * b2 * b2);
            lo = std::min(lo, scaled);
            hi = std::max(hi, scaled);
        }
        report.add("lambda0_stability",
                   make_entry({{"grid_max", hi}, {"grid_min", lo}},
                              hi / std::max(lo, 1e-300), {}, "n/a"));
    }

    std::ofstream rep(out.file("report.json"));
    if (!rep) throw io_error("cannot open report.json");
    rep << report.to_json() << "\n";
    rep.close();

    for (const auto& [key, entry] : report.entries)
        std::cout << (entry.verdict == "fail" ? "[FAIL] " : "[ ok ] ") << key
                  << " (" << entry.verdict << ")\n";
    return report.all_pass() ? exit_code::success : exit_code::verdict;
}

int cmd_verify(const ExperimentConfig& cfg) {
    OutputDir out(cfg.output.dir);
    struct Check {
        std::string name;
        bool pass;
        double value;
        double limit;
    };
    std::vector<Check> checks;

    // Quadrature vs Monte Carlo for the pairwise probability.
    {
        RngStream mc(cfg.seed, streams::kernel_mc);
        const std::size_t k = 200000;
        bool ok = true;
        double worst = 0.0, limit = 0.0;
        for (double c : {0.2, 0.7}) {
            for (double B : {0.0, 1.0}) {
                const double s = std::sqrt(1.0 - c * c);
                std::size_t hits = 0;
                for (std::size_t t = 0; t < k; ++t) {
                    const double g1 = mc.next_gaussian();
                    const double g2 = mc.next_gaussian();
                    if (g1 >= B && c * g1 + s * g2 >= B) ++hits;
                }
                const double p_mc = double(hits) / double(k);
                const double p_quad = pair_activation_probability(c, B);
                const double se =
                    std::sqrt(std::max(p_quad * (1.0 - p_quad), 1e-12) / double(k));
                worst = std::max(worst, std::abs(p_mc - p_quad));
                limit = std::max(limit, 5.0 * se);
                ok = ok && std::abs(p_mc - p_quad) <= 5.0 * se;
            }
        }
        checks.push_back({"pair_probability_quadrature_vs_mc", ok, worst, limit});
    }

    // Sparse vs dense training agreement.
    {
        const Dataset data =
            gen_linear_teacher(8, 16, RngStream(cfg.seed, streams::data_points));
        InitScheme scheme{InitKind::standard, 0.5, cfg.seed};
        const ModelState m0 = init(scheme, 512, 8);
        TrainConfig tc;
        tc.eta = 1e-3;
        tc.steps = 20;
        tc.path = TrainPath::dense;
        auto [dense_model, dtrace] = train(m0, data, tc);
        tc.path = TrainPath::sparse;
        auto [sparse_model, strace] = train(m0, data, tc);
        double worst = 0.0;
        for (std::size_t i = 0; i < dense_model.W.size(); ++i)
            worst = std::max(worst, std::abs(dense_model.W[i] - sparse_model.W[i]));
        for (std::size_t r = 0; r < dense_model.m; ++r)
            worst = std::max(worst, std::abs(dense_model.b[r] - sparse_model.b[r]));
        checks.push_back({"sparse_vs_dense_params", worst <= 1e-12, worst, 1e-12});
    }

    // Analytic gradients vs central finite differences away from kinks.
    {
        const Dataset data =
            gen_linear_teacher(6, 8, RngStream(cfg.seed + 1, streams::data_points));
        InitScheme scheme{InitKind::standard, 0.3, cfg.seed + 1};
        ModelState model = init(scheme, 48, 6);
        const Gradients g = gradients(model, data);
        const double h = 1e-5;
        double worst = 0.0;
        bool ok = true;
        int tested = 0;
        for (std::size_t r = 0; r < model.m && tested < 24; ++r) {
            bool near_kink = false;
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double z =
                    simd::dot(model.weight_row(r), data.column(i), model.d) -
                    model.b[r];
                near_kink = near_kink || std::abs(z) <= 1e-3;
            }
            if (near_kink) continue;
            for (std::size_t k = 0; k < model.d; ++k) {
                const double saved = model.W[r * model.d + k];
                model.W[r * model.d + k] = saved + h;
                const double lp = loss(model, data);
                model.W[r * model.d + k] = saved - h;
                const double lm = loss(model, data);
                model.W[r * model.d + k] = saved;
                const double fd = (lp - lm) / (2.0 * h);
                const double an = g.gW[r * model.d + k];
                if (std::abs(an) < 1e-7) continue;
                const double rel = std::abs(fd - an) / std::abs(an);
                worst = std::max(worst, rel);
                ok = ok && rel <= 1e-5;
                ++tested;
            }
        }
        checks.push_back({"gradients_vs_finite_differences", ok && tested > 0,
                          worst, 1e-5});
    }

    // H = Z^T Z factorization.
    {
        const Dataset data =
            gen_linear_teacher(10, 12, RngStream(cfg.seed + 2, streams::data_points));
        InitScheme scheme{InitKind::standard, 0.7, cfg.seed + 2};
        const ModelState model = init(scheme, 256, 10);
        const SymMatrix h = empirical_ntk(model, data);
        const SymMatrix ztz = feature_matrix_Z(model, data).gram();
        double worst = 0.0;
        for (std::size_t i = 0; i < h.dim(); ++i)
            for (std::size_t j = 0; j < h.dim(); ++j)
                worst = std::max(worst, std::abs(h(i, j) - ztz(i, j)));
        checks.push_back({"ntk_equals_ztz", worst <= 1e-10, worst, 1e-10});
    }

    // Checkpoint round trip (or validation of a provided checkpoint).
    {
        if (!cfg.bounds.checkpoint.empty()) {
            const ModelState loaded = load_checkpoint(cfg.bounds.checkpoint);
            checks.push_back({"checkpoint_load", loaded.m >= 1, double(loaded.m), 1.0});
        } else {
            InitScheme scheme{InitKind::symmetric, 1.0, cfg.seed + 3};
            const ModelState model = init(scheme, 32, 7);
            const std::string path = out.file("verify_checkpoint.bin");
            save_checkpoint(model, path);
            const ModelState loaded = load_checkpoint(path);
            const bool same = loaded.m == model.m && loaded.d == model.d &&
                              loaded.W == model.W && loaded.b == model.b &&
                              loaded.a == model.a;
            checks.push_back({"checkpoint_roundtrip", same, same ? 0.0 : 1.0, 0.0});
        }
    }

    ojson doc = ojson::array();
    bool all = true;
    for (const auto& c : checks) {
        ojson row;
        row["check"] = c.name;
        row["pass"] = c.pass;
        row["value"] = c.value;
        row["limit"] = c.limit;
        doc.push_back(std::move(row));
        all = all && c.pass;
        std::cout << (c.pass ? "[ ok ] " : "[FAIL] ") << c.name << "\n";
    }
    write_json_file(doc, out.file("verify.json"));
    return all ? exit_code::success : exit_code::verdict;
}

int cmd_bench(const ExperimentConfig& cfg) {
    OutputDir out(cfg.output.dir);
    const Dataset data = make_dataset(cfg);
    const ModelState model0 = make_model(cfg, data.dim());
    const double eta = cfg.train.eta;

    // Result equality before any timing.
    const ModelState dense_next = gd_step_dense(model0, data, eta);
    const auto [sparse_next, refreshed] =
        gd_step_sparse(model0, data, eta, build_active_index(model0, data));
    double worst = 0.0;
    for (std::size_t i = 0; i < dense_next.W.size(); ++i)
        worst = std::max(worst, std::abs(dense_next.W[i] - sparse_next.W[i]));
    for (std::size_t r = 0; r < dense_next.m; ++r)
        worst = std::max(worst, std::abs(dense_next.b[r] - sparse_next.b[r]));
    if (worst > 1e-12) {
        std::cerr << "bench: sparse/dense equality precheck failed (max diff "
                  << worst << ")\n";
        return exit_code::verdict;
    }

    const double dense_ns = bench_gd_step_ns(model0, data, eta, TrainPath::dense, 5);
    const double sparse_ns = bench_gd_step_ns(model0, data, eta, TrainPath::sparse, 5);

    ojson doc;
    doc["m"] = model0.m;
    doc["n"] = data.size();
    doc["B"] = cfg.model.B;
    doc["active_fraction"] = active_fraction(activation_mask(model0, data));
    doc["dense_ns"] = dense_ns;
    doc["sparse_ns"] = sparse_ns;
    doc["speedup"] = dense_ns / sparse_ns;
    doc["max_param_diff"] = worst;
    write_json_file(doc, out.file("bench.json"));
    std::cout << "dense " << dense_ns * 1e-6 << " ms, sparse " << sparse_ns * 1e-6
              << " ms, speedup " << dense_ns / sparse_ns << "\n";
    return exit_code::success;
}

int run_command(const std::string& name, const ExperimentConfig& cfg) {
    try {
        if (name == "train") return cmd_train(cfg);
        if (name == "sparsity") return cmd_sparsity(cfg);
        if (name == "ntk") return cmd_ntk(cfg);
        if (name == "bounds") return cmd_bounds(cfg);
        if (name == "verify") return cmd_verify(cfg);
        if (name == "bench") return cmd_bench(cfg);
        std::cerr << "unknown command: " << name << "\n";
        return exit_code::config;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::divergence;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const format_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    } catch (const capacity_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const singular_matrix& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::verdict;
    } catch (const internal_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::verdict;
    } catch (const invalid_input& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const missing_data& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::config;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code::io;
    }
}

}  // namespace sntk
