#include "sntk/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sntk/errors.hpp"
#include "sntk/ntk.hpp"
#include "sntk/simd.hpp"

namespace sntk {

namespace {

constexpr double kDivergenceFactor = 1e6;
constexpr std::size_t kSparseAuditPeriod = 50;

/// Owns the evolving state of one training run. Both execution paths share
/// the same per-neuron arithmetic so their parameter trajectories match
/// bit for bit: the dense path simply scans every neuron, the sparse path
/// scans the active list (every other neuron has a zero gradient and
/// therefore frozen parameters).
struct Engine {
    ModelState state;
    const Dataset& data;
    TrainPath path;
    ActivationMask mask;
    std::vector<std::uint32_t> counts;
    std::vector<std::uint32_t> active;
    std::vector<double> f;       // current outputs
    std::vector<double> res;     // f - y
    std::vector<double> gtmp;    // per-neuron gradient scratch
    std::size_t steps_since_audit = 0;

    Engine(const ModelState& m0, const Dataset& d, TrainPath p)
        : state(m0), data(d), path(p), mask(m0.m, d.size()),
          counts(m0.m, 0), f(d.size(), 0.0), res(d.size(), 0.0),
          gtmp(m0.d, 0.0) {
        if (data.dim() != state.d)
            throw dimension_mismatch("train: dataset dim != model d");
        full_scan();
    }

    /// Recompute mask, counts, active list and outputs for every neuron.
    void full_scan() {
        std::fill(f.begin(), f.end(), 0.0);
        for (std::size_t r = 0; r < state.m; ++r) scan_row(r);
        active.clear();
        for (std::size_t r = 0; r < state.m; ++r)
            if (counts[r] >= 1) active.push_back(std::uint32_t(r));
        finish_outputs();
    }

    /// Recompute one neuron's mask row and add its output contributions
    /// into the accumulator f (which the caller zeroed beforehand).
    void scan_row(std::size_t r) {
        const double* wr = state.weight_row(r);
        const double br = state.b[r];
        const double sr = state.a[r] > 0 ? 1.0 : -1.0;
        std::uint32_t cnt = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double z = simd::dot(wr, data.column(i), state.d) - br;
            const bool on = z >= 0.0;
            mask.set(r, i, on);
            if (on) {
                ++cnt;
                f[i] += sr * z;
            }
        }
        counts[r] = cnt;
    }

    void finish_outputs() {
        const double scale = state.scale();
        for (std::size_t i = 0; i < data.size(); ++i) {
            f[i] *= scale;
            res[i] = f[i] - data.response(i);
        }
    }

    double loss() const {
        double s = 0.0;
        for (double r : res) s += r * r;
        return 0.5 * s;
    }

    /// Accumulate neuron r's gradient over its active examples and apply
    /// the step. Identical arithmetic for a neuron with an empty active
    /// row is an exact no-op, which is what makes dense == sparse.
    void update_neuron(std::size_t r, double eta) {
        const double sr = state.scale() * (state.a[r] > 0 ? 1.0 : -1.0);
        std::fill(gtmp.begin(), gtmp.end(), 0.0);
        double gb = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!mask.get(r, i)) continue;
            simd::axpy(sr * res[i], data.column(i), gtmp.data(), state.d);
            gb -= sr * res[i];
        }
        simd::axpy(-eta, gtmp.data(), state.weight_row(r), state.d);
        state.b[r] -= eta * gb;
    }

    /// One gradient step from the current state; leaves mask/counts/f
    /// describing the post-step state.
    void step(double eta) {
        if (path == TrainPath::dense) {
            for (std::size_t r = 0; r < state.m; ++r) update_neuron(r, eta);
            std::fill(f.begin(), f.end(), 0.0);
            for (std::size_t r = 0; r < state.m; ++r) scan_row(r);
            active.clear();
            for (std::size_t r = 0; r < state.m; ++r)
                if (counts[r] >= 1) active.push_back(std::uint32_t(r));
            finish_outputs();
        } else {
            // Only active neurons move, and a post-step active set is
            // always a subset of the pre-step one, so rescanning exactly
            // the pre-step active rows keeps mask and outputs exact.
            for (std::uint32_t r : active) update_neuron(r, eta);
            std::fill(f.begin(), f.end(), 0.0);
            for (std::uint32_t r : active) scan_row(r);
            std::vector<std::uint32_t> next;
            next.reserve(active.size());
            for (std::uint32_t r : active)
                if (counts[r] >= 1) next.push_back(r);
            active.swap(next);
            finish_outputs();
            if (++steps_since_audit >= kSparseAuditPeriod) {
                audit();
                steps_since_audit = 0;
            }
        }
    }

    /// Full rescan cross-check of the incrementally maintained structures.
    void audit() const {
        std::vector<double> pre(state.m);
        for (std::size_t i = 0; i < data.size(); ++i) {
            simd::matvec(state.W.data(), state.m, state.d, data.column(i),
                         pre.data());
            for (std::size_t r = 0; r < state.m; ++r) {
                const bool on = pre[r] - state.b[r] >= 0.0;
                if (on != mask.get(r, i))
                    throw internal_error(
                        "sparse index audit: mask mismatch at neuron " +
                        std::to_string(r) + ", example " + std::to_string(i));
            }
        }
    }

    ActiveSetIndex snapshot_index() const {
        return ActiveSetIndex{counts, active, mask};
    }
};

void check_divergence(double current_loss, double initial_loss,
                      std::size_t step) {
    if (!std::isfinite(current_loss))
        throw divergence_error(
            "training diverged (non-finite loss) at step " + std::to_string(step),
            long(step));
    if (current_loss > kDivergenceFactor * initial_loss)
        throw divergence_error(
            "training diverged (loss exceeded 1e6x initial) at step " +
                std::to_string(step),
            long(step));
}

}  // namespace

ActiveSetIndex build_active_index(const ModelState& model, const Dataset& data) {
    Engine e(model, data, TrainPath::sparse);
    return e.snapshot_index();
}

ModelState gd_step_dense(const ModelState& model, const Dataset& data,
                         double eta) {
    if (!(eta > 0.0)) throw invalid_input("gd_step_dense: eta must be > 0");
    Engine e(model, data, TrainPath::dense);
    e.step(eta);
    check_divergence(e.loss(), e.loss(), 0);
    return std::move(e.state);
}

std::pair<ModelState, ActiveSetIndex> gd_step_sparse(const ModelState& model,
                                                     const Dataset& data,
                                                     double eta,
                                                     const ActiveSetIndex& index) {
    if (!(eta > 0.0)) throw invalid_input("gd_step_sparse: eta must be > 0");
    Engine e(model, data, TrainPath::sparse);
    // The caller's index must describe this model exactly.
    if (index.counts != e.counts || index.active != e.active)
        throw internal_error("gd_step_sparse: stale active-set index");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::uint64_t* theirs = index.mask.column(i);
        const std::uint64_t* ours = e.mask.column(i);
        for (std::size_t w = 0; w < e.mask.words_per_column(); ++w)
            if (theirs[w] != ours[w])
                throw internal_error("gd_step_sparse: stale active-set index");
    }
    e.step(eta);
    check_divergence(e.loss(), e.loss(), 0);
    return {std::move(e.state), e.snapshot_index()};
}

namespace {

std::pair<ModelState, TrainTrace> run_training(const ModelState& model,
                                               const Dataset& data,
                                               const TrainConfig& cfg) {
    // eta == 0 is allowed as an explicit no-op run (steps still recorded).
    if (!(cfg.eta >= 0.0)) throw invalid_input("train: eta must be >= 0");
    if (cfg.track.ntk_snapshots && cfg.ntk_snapshot_every < 1)
        throw invalid_input("train: ntk_snapshot_every must be >= 1");

    Engine e(model, data, cfg.path);
    const ModelState origin = model;
    const std::size_t n = data.size();

    TrainTrace trace;
    trace.tracked = cfg.track;
    trace.neurons = model.m;
    trace.examples = n;
    trace.loss_history.reserve(cfg.steps + 1);
    trace.movement.reserve(cfg.steps + 1);
    if (cfg.track.flips) {
        trace.flip_words = e.mask.words_per_column();
        trace.flip_bits.assign(trace.flip_words * n, 0);
    }
    const ActivationMask mask0 = e.mask;

    double initial_loss = 0.0;
    for (std::size_t t = 0; t <= cfg.steps; ++t) {
        const double l = e.loss();
        if (t == 0) initial_loss = l;
        check_divergence(l, initial_loss, t);
        trace.loss_history.push_back(l);
        trace.movement.push_back(param_distance(e.state, origin));
        if (cfg.track.masks) {
            std::vector<std::uint32_t> row(n);
            for (std::size_t i = 0; i < n; ++i)
                row[i] = std::uint32_t(e.mask.column_popcount(i));
            trace.active_counts.push_back(std::move(row));
        }
        if (cfg.track.residuals) trace.residuals.push_back(e.res);
        if (cfg.track.flips) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::uint64_t* now = e.mask.column(i);
                const std::uint64_t* was = mask0.column(i);
                std::uint64_t* acc = trace.flip_bits.data() + i * trace.flip_words;
                for (std::size_t w = 0; w < trace.flip_words; ++w)
                    acc[w] |= now[w] ^ was[w];
            }
        }
        if (cfg.track.ntk_snapshots && t % cfg.ntk_snapshot_every == 0) {
            trace.snapshots.push_back(empirical_ntk_from_mask(e.mask, data));
            trace.snapshot_steps.push_back(t);
        }
        if (t < cfg.steps) e.step(cfg.eta);
    }
    return {std::move(e.state), std::move(trace)};
}

}  // namespace

std::pair<ModelState, TrainTrace> train(const ModelState& model,
                                        const Dataset& data,
                                        const TrainConfig& cfg) {
    return run_training(model, data, cfg);
}

TrainTrace gradient_flow_euler(const ModelState& model, const Dataset& data,
                               double dt, double T) {
    if (!(dt > 0.0)) throw invalid_input("gradient_flow_euler: dt must be > 0");
    if (!(T >= dt)) throw invalid_input("gradient_flow_euler: T must be >= dt");
    TrainConfig cfg;
    cfg.eta = dt;
    cfg.steps = std::size_t(std::llround(T / dt));
    cfg.path = TrainPath::dense;
    return run_training(model, data, cfg).second;
}

FlippedStats flipped_statistics(const TrainTrace& trace, std::size_t m) {
    if (!trace.tracked.flips)
        throw missing_data("flipped_statistics: trace has no flip tracking");
    if (m != trace.neurons)
        throw dimension_mismatch("flipped_statistics: m does not match trace");
    FlippedStats out;
    out.per_example.resize(trace.examples);
    for (std::size_t i = 0; i < trace.examples; ++i) {
        const std::uint64_t* acc = trace.flip_bits.data() + i * trace.flip_words;
        std::size_t c = 0;
        for (std::size_t w = 0; w < trace.flip_words; ++w)
            c += std::size_t(__builtin_popcountll(acc[w]));
        out.per_example[i] = c;
        out.max = std::max(out.max, c);
    }
    return out;
}

void export_trace_csv(const TrainTrace& trace, const std::string& path) {
    if (!trace.tracked.masks)
        throw missing_data("export_trace_csv: trace has no active-count tracking");
    std::ofstream out(path);
    if (!out) throw io_error("export_trace_csv: cannot open " + path);
    out << "step,loss,min_active,max_active,mean_active,rw_max,rb_max,fro\n";
    char buf[40];
    for (std::size_t t = 0; t < trace.loss_history.size(); ++t) {
        const auto& counts = trace.active_counts[t];
        std::uint32_t lo = counts.empty() ? 0 : counts[0];
        std::uint32_t hi = lo;
        double mean = 0.0;
        for (std::uint32_t c : counts) {
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            mean += double(c);
        }
        mean /= double(counts.size());
        out << t << ",";
        std::snprintf(buf, sizeof buf, "%.17g", trace.loss_history[t]);
        out << buf << "," << lo << "," << hi << ",";
        std::snprintf(buf, sizeof buf, "%.17g", mean);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", trace.movement[t].rw_max);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", trace.movement[t].rb_max);
        out << buf << ",";
        std::snprintf(buf, sizeof buf, "%.17g", trace.movement[t].fro);
        out << buf << "\n";
    }
    if (!out) throw io_error("export_trace_csv: write failed for " + path);
}

double bench_gd_step_ns(const ModelState& model, const Dataset& data,
                        double eta, TrainPath path, int reps) {
    if (reps < 1) throw invalid_input("bench_gd_step_ns: reps must be >= 1");
    Engine e(model, data, path);
    using clock = std::chrono::steady_clock;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < reps; ++k) {
        const auto start = clock::now();
        e.step(eta);
        const auto stop = clock::now();
        best = std::min(
            best,
            double(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                       .count()));
    }
    return best;
}

double active_fraction(const ActivationMask& mask) {
    std::size_t on = 0;
    for (std::size_t i = 0; i < mask.examples(); ++i)
        on += mask.column_popcount(i);
    return double(on) / (double(mask.neurons()) * double(mask.examples()));
}

}  // namespace sntk
