#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sntk/dataset.hpp"
#include "sntk/rng.hpp"

namespace sntk {

enum class InitKind { standard, symmetric };

struct InitScheme {
    InitKind kind = InitKind::standard;
    double bias_init = 0.0;  // B >= 0, every bias starts here
    std::uint64_t seed = 0;
};

/// One-hidden-layer ReLU network
///   f(x) = (1/sqrt(m)) sum_r a_r max(0, <w_r, x> - b_r).
/// Signs a_r are fixed at initialization; training touches only W and b.
struct ModelState {
    std::size_t m = 0;  // physical neuron count (2x requested for symmetric)
    std::size_t d = 0;
    std::vector<double> W;      // m x d, row-major
    std::vector<double> b;      // length m
    std::vector<std::int8_t> a; // length m, each +1 or -1

    double scale() const;  // 1/sqrt(m)
    const double* weight_row(std::size_t r) const { return W.data() + r * d; }
    double* weight_row(std::size_t r) { return W.data() + r * d; }
};

/// Activation indicators I(w_r^T x_i >= b_r), bit-packed per example:
/// column i is words(i)[r/64] bit (r%64). The boundary counts as active.
class ActivationMask {
public:
    ActivationMask(std::size_t m, std::size_t n);

    std::size_t neurons() const { return m_; }
    std::size_t examples() const { return n_; }
    std::size_t words_per_column() const { return wpc_; }

    bool get(std::size_t r, std::size_t i) const {
        return (bits_[i * wpc_ + r / 64] >> (r % 64)) & 1ull;
    }
    void set(std::size_t r, std::size_t i, bool v) {
        const std::size_t w = i * wpc_ + r / 64;
        const std::uint64_t bit = 1ull << (r % 64);
        if (v)
            bits_[w] |= bit;
        else
            bits_[w] &= ~bit;
    }
    const std::uint64_t* column(std::size_t i) const {
        return bits_.data() + i * wpc_;
    }
    std::uint64_t* column(std::size_t i) { return bits_.data() + i * wpc_; }

    /// |S_on(i)|: active neurons for example i.
    std::size_t column_popcount(std::size_t i) const;

private:
    std::size_t m_, n_, wpc_;
    std::vector<std::uint64_t> bits_;
};

ModelState init(const InitScheme& scheme, std::size_t m, std::size_t d);

double forward(const ModelState& model, std::span<const double> x);

ActivationMask activation_mask(const ModelState& model, const Dataset& data);

double loss(const ModelState& model, const Dataset& data);

/// Network outputs on every example, in one pass.
std::vector<double> forward_all(const ModelState& model, const Dataset& data);

struct Gradients {
    std::vector<double> gW;  // m x d
    std::vector<double> gb;  // m
};

/// Loss gradients: gW_r = scale * a_r * sum_i res_i * I_{r,i} * x_i and
/// gb_r = -scale * a_r * sum_i res_i * I_{r,i}, with res = f - y. Rows of
/// neurons active for no example are exactly zero.
Gradients gradients(const ModelState& model, const Dataset& data);

struct ParamDistance {
    double rw_max = 0.0;  // max_r |w_r - w_r(0)|_2
    double rb_max = 0.0;  // max_r |b_r - b_r(0)|
    double fro = 0.0;     // |[W,b] - [W(0),b(0)]|_F
};

ParamDistance param_distance(const ModelState& model, const ModelState& origin);

/// Binary checkpoint: magic "SNTK", u32 version, u64 m, u64 d, then
/// little-endian f64 W row-major, f64 b, and a as signed bytes.
void save_checkpoint(const ModelState& model, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace sntk
