#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sntk/model.hpp"
#include "sntk/train.hpp"

namespace sntk {

/// Fully validated experiment description. Parsing is strict: any key the
/// schema does not know is rejected so typos fail loudly.
struct ExperimentConfig {
    std::uint64_t seed = 1;

    struct DatasetSection {
        std::string generator = "linear_teacher";  // or separated|orthonormal|mnist_idx|csv
        std::size_t d = 5;
        std::size_t n = 32;
        double min_sep = 0.5;
        std::size_t max_tries = 100000;
        std::string images;       // mnist_idx
        std::string labels;       // mnist_idx
        std::size_t limit = 256;  // mnist_idx
        int positive_class = 0;   // mnist_idx
        std::string path;         // csv
    } dataset;

    struct ModelSection {
        std::size_t m = 1024;
        double B = 0.0;
        InitKind init = InitKind::standard;
    } model;

    struct TrainSection {
        double eta = 1e-3;
        std::size_t steps = 100;
        TrainPath path = TrainPath::dense;
    } train;

    struct NtkSection {
        std::string method = "quadrature";  // or mc
        std::size_t mc_samples = 100000;
    } ntk;

    struct BoundsSection {
        double delta = 0.05;
        double flipping_c = 1.32;
        double initial_error_C = 8.0;
        double sparsity_max_drift = 0.10;
        std::string checkpoint;  // optional input for the verify command
    } bounds;

    struct OutputSection {
        std::string dir = "out";
        std::vector<std::string> formats = {"csv", "json"};
    } output;

    bool wants_format(const std::string& fmt) const;
};

/// Parse a config file. `overrides` are dotted-path assignments such as
/// "train.eta=0.05", applied after the file is read. Throws invalid_input
/// naming the offending key on any schema violation.
ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             std::optional<std::string> out_dir_override = {},
                             std::optional<std::uint64_t> seed_override = {});

/// Build the configured dataset / initial model (input dimension comes
/// from the dataset).
Dataset make_dataset(const ExperimentConfig& cfg);
ModelState make_model(const ExperimentConfig& cfg, std::size_t input_dim);

}  // namespace sntk
