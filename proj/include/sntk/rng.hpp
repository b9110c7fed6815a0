#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace sntk {

/// Counter-based deterministic random stream.
///
/// A stream is fully determined by (master_seed, stream_id): the raw 64-bit
/// output at position k is splitmix64 iterated from a key derived by double
/// hashing the pair, so every language/platform that implements the same u64
/// arithmetic reproduces the sequence exactly. Distinct stream_ids under one
/// master seed are independent streams and safe to consume concurrently.
///
/// Gaussians come from Box-Muller on consecutive uniforms: with u1 in (0,1]
/// and u2 in [0,1), the pair is
///   r = sqrt(-2 ln u1),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2),
/// emitted in that order (z1 is cached for the next call).
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : state_(derive_key(master_seed, stream_id)) {}

    /// Child stream keyed off this stream's current position; deterministic
    /// given the same draw history.
    RngStream fork(std::uint64_t stream_id) const {
        return RngStream(state_, stream_id);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0,1]; safe as a log argument.
    double next_unit_open_low() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_open_low();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// +1 or -1, equiprobable.
    double next_sign() { return (next_u64() & 1ull) ? 1.0 : -1.0; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
        return mix(mix(seed + 0x9E3779B97F4A7C15ull) ^
                   (stream * 0xD1B54A32D192ED03ull + 0x8BB84B93962EACC9ull));
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Fixed stream ids, one per independent consumer of a master seed.
namespace streams {
inline constexpr std::uint64_t weights = 1;
inline constexpr std::uint64_t signs = 2;
inline constexpr std::uint64_t data_points = 3;
inline constexpr std::uint64_t teacher = 4;
inline constexpr std::uint64_t kernel_mc = 5;
inline constexpr std::uint64_t region_sampling = 6;
inline constexpr std::uint64_t test_inputs = 7;
}  // namespace streams

}  // namespace sntk
