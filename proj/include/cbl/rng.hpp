#pragma once

#include <cstdint>
#include <string_view>
#include <cmath>

namespace cbl {

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Splittable counter-based generator. Streams keyed by (seed, name) are
/// independent and reproduce across platforms.
struct SplitMix64 {
    uint64_t state = 0;

    explicit SplitMix64(uint64_t seed) : state(seed) {}
    SplitMix64(uint64_t seed, std::string_view stream_name)
        : state(seed ^ fnv1a64(stream_name)) {}

    uint64_t next() {
        uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// uniform in [0,1)
    double uniform() {
        return double(next() >> 11) * 0x1.0p-53;
    }

    /// uniform in [a,b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// standard normal (Box-Muller, one value per call)
    double normal() {
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

} // namespace cbl
