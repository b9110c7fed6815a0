#include "sntk/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "sntk/errors.hpp"
#include "sntk/numerics.hpp"
#include "sntk/simd.hpp"

namespace sntk {

namespace {

double norm2(const double* v, std::size_t d) {
    return std::sqrt(simd::dot(v, v, d));
}

void normalize_column(double* v, std::size_t d) {
    const double nrm = norm2(v, d);
    if (nrm == 0.0) throw invalid_input("dataset: zero-norm column");
    for (std::size_t k = 0; k < d; ++k) v[k] /= nrm;
}

double pair_separation(const double* a, const double* b, std::size_t d) {
    double diff = 0.0, sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double dm = a[k] - b[k];
        const double dp = a[k] + b[k];
        diff += dm * dm;
        sum += dp * dp;
    }
    return std::sqrt(std::min(diff, sum));
}

std::vector<double> draw_unit_column(RngStream& stream, std::size_t d) {
    std::vector<double> v = gaussian_sample(stream, d);
    normalize_column(v.data(), d);
    return v;
}

}  // namespace

Dataset::Dataset(std::size_t d, std::size_t n, std::vector<double> columns,
                 std::vector<double> responses, DatasetMeta meta)
    : d_(d), n_(n), x_(std::move(columns)), y_(std::move(responses)),
      meta_(std::move(meta)) {
    if (d_ < 1 || n_ < 1) throw invalid_input("dataset: d and n must be >= 1");
    if (x_.size() != d_ * n_ || y_.size() != n_)
        throw dimension_mismatch("dataset: storage does not match (d, n)");
    for (std::size_t i = 0; i < n_; ++i) {
        const double nrm = norm2(column(i), d_);
        if (std::abs(nrm - 1.0) > 1e-12)
            throw invalid_input("dataset: column " + std::to_string(i) +
                                " is not unit-norm");
        if (!std::isfinite(y_[i]) || std::abs(y_[i]) > meta_.y_max + 1e-12)
            throw invalid_input("dataset: response " + std::to_string(i) +
                                " exceeds recorded y_max");
    }
}

double Dataset::gram(std::size_t i, std::size_t j) const {
    return simd::dot(column(i), column(j), d_);
}

Dataset gen_linear_teacher(std::size_t d, std::size_t n, RngStream stream) {
    if (d < 1 || n < 1) throw invalid_input("gen_linear_teacher: d, n >= 1");
    RngStream teacher_stream = stream.fork(streams::teacher);
    std::vector<double> w = draw_unit_column(teacher_stream, d);

    std::vector<double> x(d * n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* col = x.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) col[k] = stream.next_gaussian();
        normalize_column(col, d);
        // Response from the normalized point, so |y_i| <= 1 by Cauchy-Schwarz.
        y[i] = simd::dot(w.data(), col, d);
    }
    DatasetMeta meta;
    meta.name = "linear_teacher";
    meta.params = "d=" + std::to_string(d) + ",n=" + std::to_string(n);
    meta.y_max = 1.0;
    return Dataset(d, n, std::move(x), std::move(y), std::move(meta));
}

Dataset gen_separated(std::size_t d, std::size_t n, double min_sep,
                      RngStream stream, std::size_t max_tries) {
    if (!(min_sep > 0.0) || min_sep > std::sqrt(2.0) + 1e-12)
        throw invalid_input("gen_separated: min_sep must be in (0, sqrt(2)]");
    RngStream teacher_stream = stream.fork(streams::teacher);
    std::vector<double> w = draw_unit_column(teacher_stream, d);

    std::vector<double> x;
    x.reserve(d * n);
    std::size_t accepted = 0;
    for (std::size_t tries = 0; accepted < n; ++tries) {
        if (tries >= max_tries)
            throw capacity_error(
                "gen_separated: exhausted " + std::to_string(max_tries) +
                    " tries with " + std::to_string(accepted) + " of " +
                    std::to_string(n) + " points placed",
                accepted);
        std::vector<double> cand = draw_unit_column(stream, d);
        bool ok = true;
        for (std::size_t i = 0; i < accepted && ok; ++i)
            ok = pair_separation(x.data() + i * d, cand.data(), d) >= min_sep;
        if (!ok) continue;
        x.insert(x.end(), cand.begin(), cand.end());
        ++accepted;
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = std::clamp(simd::dot(w.data(), x.data() + i * d, d), -1.0, 1.0);

    DatasetMeta meta;
    meta.name = "separated";
    meta.params = "d=" + std::to_string(d) + ",n=" + std::to_string(n) +
                  ",min_sep=" + std::to_string(min_sep);
    meta.y_max = 1.0;
    return Dataset(d, n, std::move(x), std::move(y), std::move(meta));
}

Dataset gen_orthonormal(std::size_t d, std::size_t n, RngStream stream) {
    if (n > d) throw domain_error("gen_orthonormal: requires n <= d");
    std::vector<double> x(d * n);
    for (std::size_t i = 0; i < n; ++i) {
        double* col = x.data() + i * d;
        for (std::size_t k = 0; k < d; ++k) col[k] = stream.next_gaussian();
        // Modified Gram-Schmidt, twice, for 1e-10 orthogonality.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                const double* prev = x.data() + j * d;
                const double proj = simd::dot(prev, col, d);
                simd::axpy(-proj, prev, col, d);
            }
        }
        normalize_column(col, d);
    }
    RngStream teacher_stream = stream.fork(streams::teacher);
    std::vector<double> w = draw_unit_column(teacher_stream, d);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = simd::dot(w.data(), x.data() + i * d, d);

    DatasetMeta meta;
    meta.name = "orthonormal";
    meta.params = "d=" + std::to_string(d) + ",n=" + std::to_string(n);
    meta.y_max = 1.0;
    return Dataset(d, n, std::move(x), std::move(y), std::move(meta));
}

namespace {

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path,
                          std::size_t& offset) {
    unsigned char buf[4];
    in.read(reinterpret_cast<char*>(buf), 4);
    if (!in)
        throw format_error("idx: truncated header in " + path + " at byte " +
                               std::to_string(offset),
                           offset);
    offset += 4;
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_mnist_idx(const std::string& images_path,
                       const std::string& labels_path, std::size_t limit,
                       int positive_class) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw io_error("idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw io_error("idx: cannot open " + labels_path);

    std::size_t img_off = 0, lab_off = 0;
    const std::uint32_t img_magic = read_be_u32(img, images_path, img_off);
    if (img_magic != 0x00000803u)
        throw format_error("idx: bad image magic in " + images_path +
                               " at byte 0",
                           0);
    const std::uint32_t img_count = read_be_u32(img, images_path, img_off);
    const std::uint32_t rows = read_be_u32(img, images_path, img_off);
    const std::uint32_t cols = read_be_u32(img, images_path, img_off);

    const std::uint32_t lab_magic = read_be_u32(lab, labels_path, lab_off);
    if (lab_magic != 0x00000801u)
        throw format_error("idx: bad label magic in " + labels_path +
                               " at byte 0",
                           0);
    const std::uint32_t lab_count = read_be_u32(lab, labels_path, lab_off);
    if (img_count != lab_count)
        throw format_error("idx: image count " + std::to_string(img_count) +
                               " != label count " + std::to_string(lab_count),
                           lab_off);

    const std::size_t d = std::size_t(rows) * cols;
    if (d == 0) throw format_error("idx: zero image dimensions", img_off);
    const std::size_t take = std::min<std::size_t>(limit, img_count);

    std::vector<double> x;
    std::vector<double> y;
    std::vector<unsigned char> pix(d);
    std::size_t zero_dropped = 0, dup_dropped = 0;
    for (std::size_t i = 0; i < take; ++i) {
        img.read(reinterpret_cast<char*>(pix.data()), std::streamsize(d));
        if (!img)
            throw format_error("idx: truncated image data in " + images_path +
                                   " at byte " + std::to_string(img_off),
                               img_off);
        img_off += d;
        char lbl_c;
        lab.read(&lbl_c, 1);
        if (!lab)
            throw format_error("idx: truncated label data in " + labels_path +
                                   " at byte " + std::to_string(lab_off),
                               lab_off);
        lab_off += 1;

        std::vector<double> col(d);
        double norm_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            col[k] = double(pix[k]);
            norm_sq += col[k] * col[k];
        }
        if (norm_sq == 0.0) {
            ++zero_dropped;
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t k = 0; k < d; ++k) col[k] *= inv;

        bool dup = false;
        for (std::size_t j = 0; j * d < x.size() && !dup; ++j)
            dup = pair_separation(x.data() + j * d, col.data(), d) <= 1e-9;
        if (dup) {
            ++dup_dropped;
            continue;
        }
        x.insert(x.end(), col.begin(), col.end());
        y.push_back(int(static_cast<unsigned char>(lbl_c)) == positive_class
                        ? 1.0
                        : -1.0);
    }
    if (y.empty()) throw invalid_input("idx: no usable examples after filtering");

    DatasetMeta meta;
    meta.name = "mnist_idx";
    meta.params = "limit=" + std::to_string(limit) +
                  ",positive=" + std::to_string(positive_class);
    meta.y_max = 1.0;
    meta.dropped = zero_dropped + dup_dropped;
    const std::size_t kept = y.size();
    return Dataset(d, kept, std::move(x), std::move(y), std::move(meta));
}

void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("save_csv: cannot open " + path);
    out << "d,n,y_max\n";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", data.meta().y_max);
    out << data.dim() << "," << data.size() << "," << buf << "\n";
    // One row per example: x_1,...,x_d,y.
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double* col = data.column(i);
        for (std::size_t k = 0; k < data.dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g", col[k]);
            out << buf << ",";
        }
        std::snprintf(buf, sizeof buf, "%.17g", data.response(i));
        out << buf << "\n";
    }
    if (!out) throw io_error("save_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("load_csv: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;

    auto next_line = [&](const char* what) {
        if (!std::getline(in, line))
            throw format_error("load_csv: missing " + std::string(what) +
                                   " at line " + std::to_string(lineno + 1),
                               lineno + 1);
        ++lineno;
    };

    next_line("header");
    if (line != "d,n,y_max")
        throw format_error("load_csv: expected header 'd,n,y_max' at line 1", 1);
    next_line("dimension row");
    std::size_t d = 0, n = 0;
    double y_max = 0.0;
    {
        std::istringstream ss(line);
        char c1, c2;
        if (!(ss >> d >> c1 >> n >> c2 >> y_max) || c1 != ',' || c2 != ',')
            throw format_error("load_csv: bad dimension row at line 2", 2);
    }
    std::vector<double> x(d * n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        next_line("data row");
        std::istringstream ss(line);
        std::string field;
        for (std::size_t k = 0; k <= d; ++k) {
            if (!std::getline(ss, field, ','))
                throw format_error("load_csv: short data row at line " +
                                       std::to_string(lineno),
                                   lineno);
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (end == field.c_str())
                throw format_error("load_csv: bad number at line " +
                                       std::to_string(lineno),
                                   lineno);
            if (k < d)
                x[i * d + k] = v;
            else
                y[i] = v;
        }
    }
    DatasetMeta meta;
    meta.name = "csv:" + path;
    meta.y_max = y_max;
    return Dataset(d, n, std::move(x), std::move(y), std::move(meta));
}

double data_separation(const Dataset& data) {
    if (data.size() < 2)
        throw domain_error("data_separation: needs at least two points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = i + 1; j < data.size(); ++j)
            best = std::min(best,
                            pair_separation(data.column(i), data.column(j),
                                            data.dim()));
    return best;
}

}  // namespace sntk
