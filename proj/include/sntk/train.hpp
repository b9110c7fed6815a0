#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sntk/dataset.hpp"
#include "sntk/model.hpp"
#include "sntk/numerics.hpp"

namespace sntk {

enum class TrainPath { dense, sparse };

struct TrackFlags {
    bool flips = false;          // cumulative flipped-neuron sets
    bool ntk_snapshots = false;  // empirical kernel every ntk_snapshot_every
    bool masks = false;          // per-step per-example active counts
    bool residuals = false;      // per-step f(t) - y
};

struct TrainConfig {
    double eta = 0.0;
    std::size_t steps = 0;
    TrainPath path = TrainPath::dense;
    TrackFlags track;
    std::size_t ntk_snapshot_every = 1;
};

/// Per-run instrumentation. loss_history and movement always cover steps
/// 0..steps inclusive; the optional fields follow their tracking flags.
struct TrainTrace {
    std::vector<double> loss_history;                       // 1/2 |f - y|^2
    std::vector<ParamDistance> movement;                    // vs step 0
    std::vector<std::vector<std::uint32_t>> active_counts;  // [t][i]
    std::vector<std::vector<double>> residuals;             // [t][i], f - y
    std::vector<SymMatrix> snapshots;
    std::vector<std::size_t> snapshot_steps;
    // Cumulative flipped-neuron bitsets, one block of flip_words per example.
    std::vector<std::uint64_t> flip_bits;
    std::size_t flip_words = 0;
    std::size_t neurons = 0;
    std::size_t examples = 0;
    TrackFlags tracked;
};

/// Per-neuron activity summary maintained by the sparse path. A neuron is
/// in `active` iff it is active for at least one example; only those
/// neurons can receive a nonzero update, so all others are frozen.
struct ActiveSetIndex {
    std::vector<std::uint32_t> counts;  // per neuron, #examples active
    std::vector<std::uint32_t> active;  // ascending ids with counts >= 1
    ActivationMask mask;
};

ActiveSetIndex build_active_index(const ModelState& model, const Dataset& data);

/// One full-batch gradient-descent step on every neuron.
ModelState gd_step_dense(const ModelState& model, const Dataset& data,
                         double eta);

/// Same update touching only the indexed active neurons; validates the
/// index against a fresh scan first (internal_error when stale) and
/// returns the refreshed index alongside the new state.
std::pair<ModelState, ActiveSetIndex> gd_step_sparse(const ModelState& model,
                                                     const Dataset& data,
                                                     double eta,
                                                     const ActiveSetIndex& index);

/// cfg.steps full-batch steps with instrumentation. Throws divergence_error
/// (with the step index) when the loss goes non-finite or exceeds 1e6x the
/// initial loss.
std::pair<ModelState, TrainTrace> train(const ModelState& model,
                                        const Dataset& data,
                                        const TrainConfig& cfg);

/// Explicit Euler discretization of d[W,b]/dt = -grad L with step dt up to
/// time T; each Euler node is exactly one gradient step with eta = dt.
TrainTrace gradient_flow_euler(const ModelState& model, const Dataset& data,
                               double dt, double T);

struct FlippedStats {
    std::vector<std::size_t> per_example;  // |flipped set_i|
    std::size_t max = 0;
};

/// Requires flips tracking; m must match the traced neuron count.
FlippedStats flipped_statistics(const TrainTrace& trace, std::size_t m);

/// CSV with columns step,loss,min_active,max_active,mean_active,rw_max,
/// rb_max,fro; requires masks tracking.
void export_trace_csv(const TrainTrace& trace, const std::string& path);

/// Wall time of one gradient step (ns), best of `reps`, excluding engine
/// setup. Used by the bench command.
double bench_gd_step_ns(const ModelState& model, const Dataset& data,
                        double eta, TrainPath path, int reps);

/// Fraction of (neuron, example) pairs active under the current mask.
double active_fraction(const ActivationMask& mask);

}  // namespace sntk
