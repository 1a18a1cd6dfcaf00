#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace xbarlstm {

// Deterministic 64-bit generator (splitmix64 walk). Hand-rolled instead of
// <random> so that streams are bit-identical across standard libraries and
// platforms; simulation results must reproduce byte-for-byte from a seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller. Two uniforms per sample, no cached spare.
    double normal(double mean = 0.0, double stddev = 1.0) {
        const double u1 = 1.0 - uniform01(); // (0, 1], keeps log() finite
        const double u2 = uniform01();
        constexpr double two_pi = 6.283185307179586476925286766559;
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * r * std::cos(two_pi * u2);
    }

private:
    std::uint64_t state_;
};

// Named substream derivation: one master seed fans out into independent
// streams (init, d2d, c2c, read, ...) so that toggling one noise source
// never perturbs the draws of another.
inline std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL; // FNV-1a offset basis
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::uint64_t z = master ^ h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng substream(std::uint64_t master, std::string_view name) {
    return Rng(derive_stream_seed(master, name));
}

} // namespace xbarlstm
