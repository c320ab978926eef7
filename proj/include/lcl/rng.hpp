#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "lcl/hash.hpp"

namespace lcl {

// Deterministic RNG wrapper. Normal draws go through an explicit Box-Muller
// so sequences are reproducible across standard libraries (std::normal_distribution
// is not portable).
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t raw() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_int(uint64_t n) {
        // rejection sampling to avoid modulo bias
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so log() is finite
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586477 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Derive an independent child stream; label keeps call sites collision-free.
    Rng derive(std::string_view label) {
        return Rng(hash_combine(engine_(), fnv1a64(label)));
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Deterministic seed derivation without consuming generator state.
inline uint64_t derive_seed(uint64_t base, std::string_view label, uint64_t index = 0) {
    return hash_combine(hash_combine(base, fnv1a64(label)), index);
}

}  // namespace lcl
