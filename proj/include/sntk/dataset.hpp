#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sntk/rng.hpp"

namespace sntk {

struct DatasetMeta {
    std::string name;
    std::uint64_t seed = 0;
    std::string params;          // generator parameters, human readable
    double y_max = 1.0;          // recorded |y| bound
    std::size_t dropped = 0;     // columns removed during ingestion
};

/// Feature matrix X (d x n, columns exactly unit-norm) plus responses y.
/// Columns are stored contiguously so per-example dot products are flat.
class Dataset {
public:
    Dataset(std::size_t d, std::size_t n, std::vector<double> columns,
            std::vector<double> responses, DatasetMeta meta);

    std::size_t dim() const { return d_; }
    std::size_t size() const { return n_; }
    const double* column(std::size_t i) const { return x_.data() + i * d_; }
    double response(std::size_t i) const { return y_[i]; }
    const std::vector<double>& responses() const { return y_; }
    const std::vector<double>& columns() const { return x_; }
    const DatasetMeta& meta() const { return meta_; }

    /// <x_i, x_j>.
    double gram(std::size_t i, std::size_t j) const;

private:
    std::size_t d_, n_;
    std::vector<double> x_;  // column-major, n columns of length d
    std::vector<double> y_;
    DatasetMeta meta_;
};

/// Unit-norm Gaussian points with responses y_i = <w, x_i> for a fixed
/// unit-norm teacher w drawn first from the stream.
Dataset gen_linear_teacher(std::size_t d, std::size_t n, RngStream stream);

/// Rejection-samples unit vectors until every pair satisfies
/// min(|x_i - x_j|, |x_i + x_j|) >= min_sep. Throws capacity_error with the
/// achieved count when max_tries candidates are exhausted.
Dataset gen_separated(std::size_t d, std::size_t n, double min_sep,
                      RngStream stream, std::size_t max_tries);

/// Gram-Schmidt on Gaussian draws; requires n <= d.
Dataset gen_orthonormal(std::size_t d, std::size_t n, RngStream stream);

/// IDX ingestion: flattens images, scales each to unit norm, labels +1 for
/// positive_class else -1. Zero-norm images are dropped (counted in meta),
/// as are near-duplicate/antipodal columns (tolerance 1e-9).
Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path, std::size_t limit,
                       int positive_class);

void save_csv(const Dataset& data, const std::string& path);
Dataset load_csv(const std::string& path);

/// min over i<j of min(|x_i - x_j|, |x_i + x_j|); requires n >= 2.
double data_separation(const Dataset& data);

}  // namespace sntk
