#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace lossprior {

// SplitMix64 (Steele, Lea & Flood; Vigna's fixed-increment variant).
// One 64-bit word of state. Distinct seeds give independent streams, which is
// what the per-replicate substream scheme below relies on. All simulation
// randomness in this project flows through this generator so that results are
// bit-reproducible across platforms and thread counts.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1): 53-bit mantissa, midpoint offset,
    // never exactly 0 or 1.
    double uniform_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform_open() < p; }

    // Standard normal via Box-Muller; the companion variate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// 64-bit avalanche (the SplitMix64 finalizer).
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Seed of the substream identified by (seed, id1, id2). Replicate streams are
// substream(seed, case_id, rep_index): independent of evaluation order and of
// how work is split across threads.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t id1, std::uint64_t id2 = 0) {
    std::uint64_t h = mix64(seed ^ 0xA0761D6478BD642Full);
    h = mix64(h ^ (id1 + 0x9E3779B97F4A7C15ull));
    h = mix64(h ^ (id2 + 0xE7037ED1A0B428DBull));
    return h;
}

// FNV-1a over raw bytes; used for case ids and file checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t h = 0xCBF29CE484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace lossprior
