#ifndef SEMCOM_RNG_HPP
#define SEMCOM_RNG_HPP

#include <cmath>
#include <cstdint>

namespace semcom {

// Counter-based pseudo-random generation. Every stochastic component of the
// simulator derives an independent stream key from (seed, trial, slot,
// purpose), so trials are reproducible regardless of execution order.

/// SplitMix64 finalizer: bijective 64-bit mix.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream key from a base seed and up to three
/// sub-stream indices.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed);
    k = mix64(k ^ (a + 0xA0761D6478BD642FULL));
    k = mix64(k ^ (b + 0xE7037ED1A0B428DBULL));
    k = mix64(k ^ (c + 0x8EBC6AF09C88C6E3ULL));
    return k;
}

/// Deterministic stream generator (SplitMix64 over an incrementing counter).
/// Identical keys produce identical streams on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; caches the second variate.
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
        const double theta = 6.283185307179586476925286766559 * uniform();
        cache_ = r * std::sin(theta);
        have_cache_ = true;
        return r * std::cos(theta);
    }

    /// Exponential(1) variate; used for Rayleigh power gains |h|^2.
    double exponential() { return -std::log(uniform_pos()); }

  private:
    std::uint64_t state_;
    double cache_ = 0.0;
    bool have_cache_ = false;
};

}  // namespace semcom

#endif
