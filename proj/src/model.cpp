#include "sntk/model.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "sntk/errors.hpp"
#include "sntk/numerics.hpp"
#include "sntk/simd.hpp"

namespace sntk {

double ModelState::scale() const { return 1.0 / std::sqrt(double(m)); }

ActivationMask::ActivationMask(std::size_t m, std::size_t n)
    : m_(m), n_(n), wpc_((m + 63) / 64), bits_(wpc_ * n, 0) {}

std::size_t ActivationMask::column_popcount(std::size_t i) const {
    const std::uint64_t* col = column(i);
    std::size_t c = 0;
    for (std::size_t w = 0; w < wpc_; ++w)
        c += std::size_t(std::popcount(col[w]));
    return c;
}

ModelState init(const InitScheme& scheme, std::size_t m, std::size_t d) {
    if (m < 1 || d < 1) throw invalid_input("init: m and d must be >= 1");
    if (scheme.bias_init < 0.0) throw invalid_input("init: bias_init must be >= 0");

    RngStream wstream(scheme.seed, streams::weights);
    RngStream astream(scheme.seed, streams::signs);

    ModelState s;
    s.d = d;
    if (scheme.kind == InitKind::standard) {
        s.m = m;
        s.W = gaussian_sample(wstream, m * d);
        s.a.resize(m);
        for (std::size_t r = 0; r < m; ++r)
            s.a[r] = astream.next_sign() > 0 ? 1 : -1;
    } else {
        // Mirrored halves: w_{m+r} = w_r, a_{m+r} = -a_r, so the network
        // output is exactly zero at initialization.
        s.m = 2 * m;
        std::vector<double> half = gaussian_sample(wstream, m * d);
        s.W.resize(2 * m * d);
        std::memcpy(s.W.data(), half.data(), m * d * sizeof(double));
        std::memcpy(s.W.data() + m * d, half.data(), m * d * sizeof(double));
        s.a.resize(2 * m);
        for (std::size_t r = 0; r < m; ++r) {
            s.a[r] = astream.next_sign() > 0 ? 1 : -1;
            s.a[m + r] = static_cast<std::int8_t>(-s.a[r]);
        }
    }
    s.b.assign(s.m, scheme.bias_init);
    return s;
}

double forward(const ModelState& model, std::span<const double> x) {
    if (x.size() != model.d) throw dimension_mismatch("forward: |x| != d");
    double acc = 0.0;
    for (std::size_t r = 0; r < model.m; ++r) {
        const double z = simd::dot(model.weight_row(r), x.data(), model.d) -
                         model.b[r];
        if (z >= 0.0) acc += model.a[r] > 0 ? z : -z;
    }
    return model.scale() * acc;
}

ActivationMask activation_mask(const ModelState& model, const Dataset& data) {
    if (data.dim() != model.d)
        throw dimension_mismatch("activation_mask: dataset dim != d");
    ActivationMask mask(model.m, data.size());
    std::vector<double> pre(model.m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        simd::matvec(model.W.data(), model.m, model.d, data.column(i),
                     pre.data());
        std::uint64_t* col = mask.column(i);
        for (std::size_t r = 0; r < model.m; ++r)
            if (pre[r] - model.b[r] >= 0.0) col[r / 64] |= 1ull << (r % 64);
    }
    return mask;
}

std::vector<double> forward_all(const ModelState& model, const Dataset& data) {
    if (data.dim() != model.d)
        throw dimension_mismatch("forward_all: dataset dim != d");
    const double scale = model.scale();
    std::vector<double> out(data.size());
    std::vector<double> pre(model.m);
    for (std::size_t i = 0; i < data.size(); ++i) {
        simd::matvec(model.W.data(), model.m, model.d, data.column(i),
                     pre.data());
        double acc = 0.0;
        for (std::size_t r = 0; r < model.m; ++r) {
            const double z = pre[r] - model.b[r];
            if (z >= 0.0) acc += model.a[r] > 0 ? z : -z;
        }
        out[i] = scale * acc;
    }
    return out;
}

double loss(const ModelState& model, const Dataset& data) {
    const std::vector<double> f = forward_all(model, data);
    double s = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = f[i] - data.response(i);
        s += r * r;
    }
    return 0.5 * s;
}

Gradients gradients(const ModelState& model, const Dataset& data) {
    const std::size_t m = model.m, d = model.d, n = data.size();
    const std::vector<double> f = forward_all(model, data);
    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) res[i] = f[i] - data.response(i);

    const ActivationMask mask = activation_mask(model, data);
    const double scale = model.scale();

    Gradients g;
    g.gW.assign(m * d, 0.0);
    g.gb.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        double* grow = g.gW.data() + r * d;
        double gb = 0.0;
        const double sr = scale * (model.a[r] > 0 ? 1.0 : -1.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask.get(r, i)) continue;
            simd::axpy(sr * res[i], data.column(i), grow, d);
            gb -= sr * res[i];
        }
        g.gb[r] = gb;
    }
    return g;
}

ParamDistance param_distance(const ModelState& model, const ModelState& origin) {
    if (model.m != origin.m || model.d != origin.d)
        throw dimension_mismatch("param_distance: shape mismatch");
    ParamDistance out;
    double fro_sq = 0.0;
    for (std::size_t r = 0; r < model.m; ++r) {
        const double* wr = model.weight_row(r);
        const double* w0 = origin.weight_row(r);
        double dw_sq = 0.0;
        for (std::size_t k = 0; k < model.d; ++k) {
            const double dk = wr[k] - w0[k];
            dw_sq += dk * dk;
        }
        const double db = model.b[r] - origin.b[r];
        out.rw_max = std::max(out.rw_max, std::sqrt(dw_sq));
        out.rb_max = std::max(out.rb_max, std::abs(db));
        fro_sq += dw_sq + db * db;
    }
    out.fro = std::sqrt(fro_sq);
    return out;
}

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

std::uint32_t take_u32(std::ifstream& in, std::size_t& off, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
        throw format_error(std::string("checkpoint: truncated ") + what +
                               " at byte " + std::to_string(off),
                           off);
    off += 4;
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

std::uint64_t take_u64(std::ifstream& in, std::size_t& off, const char* what) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in)
        throw format_error(std::string("checkpoint: truncated ") + what +
                               " at byte " + std::to_string(off),
                           off);
    off += 8;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

double take_f64(std::ifstream& in, std::size_t& off, const char* what) {
    const std::uint64_t bits = take_u64(in, off, what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const ModelState& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("checkpoint: cannot open " + path);
    out.write("SNTK", 4);
    put_u32(out, kCheckpointVersion);
    put_u64(out, model.m);
    put_u64(out, model.d);
    for (double v : model.W) put_f64(out, v);
    for (double v : model.b) put_f64(out, v);
    out.write(reinterpret_cast<const char*>(model.a.data()),
              std::streamsize(model.a.size()));
    if (!out) throw io_error("checkpoint: write failed for " + path);
}

ModelState load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("checkpoint: cannot open " + path);
    std::size_t off = 0;
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "SNTK", 4) != 0)
        throw format_error("checkpoint: bad magic in " + path + " at byte 0", 0);
    off += 4;
    const std::uint32_t version = take_u32(in, off, "version");
    if (version != kCheckpointVersion)
        throw format_error("checkpoint: unsupported version " +
                               std::to_string(version),
                           off);
    ModelState s;
    s.m = take_u64(in, off, "m");
    s.d = take_u64(in, off, "d");
    if (s.m < 1 || s.d < 1 || s.m > (1ull << 32) || s.d > (1ull << 24))
        throw format_error("checkpoint: implausible dimensions", off);
    s.W.resize(s.m * s.d);
    for (double& v : s.W) v = take_f64(in, off, "weights");
    s.b.resize(s.m);
    for (double& v : s.b) v = take_f64(in, off, "biases");
    s.a.resize(s.m);
    in.read(reinterpret_cast<char*>(s.a.data()), std::streamsize(s.m));
    if (!in)
        throw format_error("checkpoint: truncated signs at byte " +
                               std::to_string(off),
                           off);
    for (std::int8_t sv : s.a)
        if (sv != 1 && sv != -1)
            throw format_error("checkpoint: sign byte outside {-1,+1}", off);
    return s;
}

}  // namespace sntk
