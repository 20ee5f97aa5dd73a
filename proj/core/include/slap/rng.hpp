#pragma once

#include <cstdint>
#include <vector>
#include <numeric>

namespace slap {

/// Counter-based pseudo random generator (splitmix64 core). Streams are
/// derived from (seed, stream) pairs, so independent ranks can draw
/// identical sequences without communicating.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed * 0x9e3779b97f4a7c15ULL + stream + 1)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform in [0, bound), bound > 0 (modulo draw; bound << 2^64).
    std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::int64_t next_in(std::int64_t lo, std::int64_t hi) { // inclusive range
        return lo + static_cast<std::int64_t>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t state_;
};

/// Deterministic Fisher-Yates permutation of {0..n-1} for the given seed.
inline std::vector<std::int64_t> random_permutation(std::int64_t n, std::uint64_t seed, std::uint64_t stream) {
    std::vector<std::int64_t> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), std::int64_t{0});
    Rng rng(seed, stream);
    for (std::int64_t i = n - 1; i > 0; --i) {
        auto j = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
}

} // namespace slap
