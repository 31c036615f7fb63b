#pragma once

// Deterministic random-number plumbing shared by every component.
//
// All randomness in the toolkit flows through Rng so that a single 64-bit seed
// pins generation, augmentation, training, and evaluation byte-for-byte.
// Independent sub-streams are derived with seed_split(seed, tag): hash the tag
// into the seed and run the result through SplitMix64.  Forks depend only on
// the parent's base seed and the tag, never on how much the parent has already
// consumed, so a stream can be reproduced in isolation.

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mixcode {

// --- Seed splitting ---

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// The documented rule: child stream seed = splitmix64(seed ^ fnv1a64(tag)).
inline std::uint64_t seed_split(std::uint64_t seed, std::string_view tag) {
    return splitmix64(seed ^ fnv1a64(tag));
}

// --- Rng ---

class Rng {
public:
    explicit Rng(std::uint64_t seed) : base_seed_(seed), gen_(seed) {}

    std::uint64_t base_seed() const { return base_seed_; }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n); n must be nonzero.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t limit = ~0ull - ~0ull % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(
                        uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    // Standard normal via the Marsaglia polar method (spare discarded so the
    // draw count per call is well defined for reproducibility).
    double normal01() {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    // Independent child stream; depends only on (base seed, tag).
    Rng fork(std::string_view tag) const { return Rng(seed_split(base_seed_, tag)); }

    // In-place Fisher-Yates shuffle; the pinned epoch-shuffle implementation.
    template <typename Vec>
    void shuffle(Vec& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t base_seed_;
    std::mt19937_64 gen_;
};

}  // namespace mixcode
