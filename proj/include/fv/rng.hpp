#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace fv {

// Deterministic, platform-independent RNG (splitmix64 core). All randomness in
// the library flows from a single seed through named substreams so that
// campaigns are reproducible bit-for-bit and trials can fan out independently.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // decorrelate trivially related seeds
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (own implementation: std::normal_distribution
    // is not bit-stable across standard libraries)
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // Named-substream splitter: derive an independent generator for
    // (stream name, index) without perturbing this one.
    Rng stream(std::string_view name, std::uint64_t index = 0) const {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (char c : name) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ull;
        }
        return Rng(state_ ^ h ^ (0x9e3779b97f4a7c15ull * (index + 1)));
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace fv
