#include "sntk/ntk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "sntk/errors.hpp"
#include "sntk/simd.hpp"

namespace sntk {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void require_unit_columns(const Dataset& data, const char* op) {
    for (std::size_t i = 0; i < data.size(); ++i)
        if (std::abs(data.gram(i, i) - 1.0) > 1e-9)
            throw invalid_input(std::string(op) + ": columns must be unit-norm");
}

}  // namespace

FeatureMatrixZ::FeatureMatrixZ(std::size_t m, std::size_t d, std::size_t n)
    : rows_(m * (d + 1)), n_(n), v_(rows_ * n, 0.0) {}

double FeatureMatrixZ::frobenius_norm() const {
    return std::sqrt(simd::dot(v_.data(), v_.data(), v_.size()));
}

SymMatrix FeatureMatrixZ::gram() const {
    SymMatrix g(n_);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i; j < n_; ++j)
            g.set(i, j, simd::dot(column(i), column(j), rows_));
    return g;
}

double PairProbMatrix::min_offdiag() const {
    const std::size_t n = probs.dim();
    if (n < 2) throw domain_error("PairProbMatrix: no off-diagonal for n < 2");
    double best = probs(0, 1);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, probs(i, j));
    return best;
}

SymMatrix empirical_ntk_from_mask(const ActivationMask& mask,
                                  const Dataset& data) {
    if (mask.examples() != data.size())
        throw dimension_mismatch("empirical_ntk: mask/data example mismatch");
    const std::size_t n = data.size();
    const double inv_m = 1.0 / double(mask.neurons());
    const std::size_t w = mask.words_per_column();
    SymMatrix h(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const std::size_t both =
                simd::and_popcount(mask.column(i), mask.column(j), w);
            h.set(i, j, (data.gram(i, j) + 1.0) * double(both) * inv_m);
        }
    return h;
}

SymMatrix empirical_ntk(const ModelState& model, const Dataset& data) {
    return empirical_ntk_from_mask(activation_mask(model, data), data);
}

FeatureMatrixZ feature_matrix_Z(const ModelState& model, const Dataset& data) {
    if (data.dim() != model.d)
        throw dimension_mismatch("feature_matrix_Z: dataset dim != d");
    const ActivationMask mask = activation_mask(model, data);
    const std::size_t d = model.d;
    const double scale = model.scale();
    FeatureMatrixZ z(model.m, d, data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double* col = z.column(i);
        const double* x = data.column(i);
        for (std::size_t r = 0; r < model.m; ++r) {
            if (!mask.get(r, i)) continue;
            const double sr = scale * (model.a[r] > 0 ? 1.0 : -1.0);
            double* block = col + r * (d + 1);
            for (std::size_t k = 0; k < d; ++k) block[k] = sr * x[k];
            block[d] = -sr;
        }
    }
    return z;
}

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGLNode[8] = {
    -0.96028985649753623168, -0.79666647741362673959,
    -0.52553240991632898582, -0.18343464249564980494,
    0.18343464249564980494,  0.52553240991632898582,
    0.79666647741362673959,  0.96028985649753623168};
constexpr double kGLWeight[8] = {
    0.10122853629037625915, 0.22238103445337447054,
    0.31370664587788728734, 0.36268378337836198297,
    0.36268378337836198297, 0.31370664587788728734,
    0.22238103445337447054, 0.10122853629037625915};

}  // namespace

double pair_activation_probability(double c, double B) {
    if (!(std::abs(c) <= 1.0))
        throw invalid_input("pair_activation_probability: |c| must be <= 1");
    if (!(B >= 0.0))
        throw invalid_input("pair_activation_probability: B must be >= 0");
    if (c >= 1.0 - 1e-9) return normal_upper_tail(B);
    if (c <= -1.0 + 1e-9) return 0.0;

    const double s = std::sqrt(1.0 - c * c);
    const double lo = B, hi = B + 12.0;
    const int panels = 64;  // 64 panels x 8 nodes = 512 evaluations
    const double width = (hi - lo) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        const double half = 0.5 * width;
        double panel = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double t = mid + half * kGLNode[q];
            const double phi = kInvSqrt2Pi * std::exp(-0.5 * t * t);
            panel += kGLWeight[q] * phi * normal_upper_tail((B - c * t) / s);
        }
        acc += half * panel;
    }
    return acc;
}

SymMatrix limiting_ntk_quadrature(const Dataset& data, double B) {
    require_unit_columns(data, "limiting_ntk_quadrature");
    const std::size_t n = data.size();
    SymMatrix h(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double c = std::clamp(data.gram(i, j), -1.0, 1.0);
            h.set(i, j, (c + 1.0) * pair_activation_probability(c, B));
        }
    return h;
}

SymMatrix limiting_ntk_mc(const Dataset& data, double B, std::size_t samples,
                          RngStream stream) {
    if (samples < 1) throw invalid_input("limiting_ntk_mc: samples must be >= 1");
    const std::size_t n = data.size();
    const std::size_t d = data.dim();

    std::vector<std::uint64_t> joint(n * n, 0);
    std::vector<double> w(d);
    std::vector<std::uint32_t> active;
    active.reserve(n);
    for (std::size_t k = 0; k < samples; ++k) {
        for (std::size_t t = 0; t < d; ++t) w[t] = stream.next_gaussian();
        active.clear();
        for (std::size_t i = 0; i < n; ++i)
            if (simd::dot(w.data(), data.column(i), d) >= B)
                active.push_back(std::uint32_t(i));
        for (std::size_t ai = 0; ai < active.size(); ++ai)
            for (std::size_t aj = ai; aj < active.size(); ++aj)
                ++joint[active[ai] * n + active[aj]];
    }

    const double inv_k = 1.0 / double(samples);
    SymMatrix h(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            h.set(i, j, (data.gram(i, j) + 1.0) * double(joint[i * n + j]) * inv_k);
    return h;
}

PairProbMatrix pair_prob_matrix(const Dataset& data, double B) {
    require_unit_columns(data, "pair_prob_matrix");
    const std::size_t n = data.size();
    SymMatrix p(n);
    const double q = normal_upper_tail(B);
    for (std::size_t i = 0; i < n; ++i) {
        p.set(i, i, q);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double c = std::clamp(data.gram(i, j), -1.0, 1.0);
            p.set(i, j, pair_activation_probability(c, B));
        }
    }
    return PairProbMatrix{std::move(p)};
}

void export_kernel_csv(const SymMatrix& k, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("export_kernel_csv: cannot open " + path);
    const std::size_t n = k.dim();
    out << n << "\n";
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", k(i, j));
            out << buf << (j + 1 < n ? "," : "\n");
        }
    }
    if (!out) throw io_error("export_kernel_csv: write failed for " + path);
}

void export_kernel_json(const SymMatrix& k, double B, const std::string& method,
                        const std::string& path) {
    nlohmann::ordered_json doc;
    const std::size_t n = k.dim();
    doc["n"] = n;
    doc["B"] = B;
    doc["method"] = method;
    auto entries = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < n; ++i) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < n; ++j) row.push_back(k(i, j));
        entries.push_back(std::move(row));
    }
    doc["entries"] = std::move(entries);
    std::ofstream out(path);
    if (!out) throw io_error("export_kernel_json: cannot open " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw io_error("export_kernel_json: write failed for " + path);
}

}  // namespace sntk
