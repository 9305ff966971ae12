#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace robustgen {

// FNV-1a 64-bit hash. Used for seed derivation and content fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x00000100000001b3ull;
    }
    return h;
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    // Mix in 8 bytes, little-endian.
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x00000100000001b3ull;
    }
    return h;
}

// Derives an independent stream seed from a master seed, a label naming the
// purpose of the stream, and an index. Streams for different (label, index)
// pairs are decorrelated, and derivation is stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t h = fnv1a64(label);
    h = hash_combine(h, master);
    h = hash_combine(h, index);
    return h ? h : 0x9e3779b97f4a7c15ull;  // keep mt19937_64 away from the all-zero seed
}

// Deterministic random stream. The engine (mt19937_64) is fully specified by
// the standard; the uniform/normal transforms below are hand-rolled because
// std::*_distribution output is implementation-defined and would break
// byte-level reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be positive. Modulo bias is below
    // n / 2^64, irrelevant for the small n used here.
    std::uint64_t uniform_below(std::uint64_t n) { return engine_() % n; }

    // Standard normal via Box-Muller. One value per call; the spare is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        // Guard the log: push u1 == 0 to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates shuffle of indices [0, n).
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace robustgen
