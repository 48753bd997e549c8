#pragma once

#include <cmath>
#include <cstdint>

namespace mnav {

/// SplitMix64 with hand-rolled distributions. Standard-library distributions
/// are implementation-defined; this keeps every sampled sequence replayable.
struct Rng {
    uint64_t s;

    explicit Rng(uint64_t seed = 0) : s(seed) {}

    uint64_t next() {
        uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    /// Uniform in [0, 1).
    double uniform() { return (next() >> 11) * (1.0 / 9007199254740992.0); }
    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return n ? next() % n : 0; }
    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

/// Stateless mix of a base seed with stream identifiers, for deriving
/// per-frame / per-network substreams that never collide.
inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    Rng r(base ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xD1B54A32D192ED03ULL));
    return r.next();
}

}  // namespace mnav
