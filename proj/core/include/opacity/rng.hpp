#ifndef OPACITY_RNG_HPP
#define OPACITY_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace opacity {

/// splitmix64 step. Used to expand user seeds into stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a over bytes; used for config/corpus digests and stream tags.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// PCG32 (XSH-RR). Small, fast, identical output on every platform.
class Pcg32 {
public:
    Pcg32(std::uint64_t init_state, std::uint64_t init_seq) {
        state_ = 0;
        inc_ = (init_seq << 1) | 1u;
        next_u32();
        state_ += init_state;
        next_u32();
    }

    /// Seeds a generator for the named stream of a run. All randomness in
    /// the measurement path flows through this: same (seed, tag) -> same
    /// sequence on any platform.
    static Pcg32 from_seed(std::uint64_t seed, std::string_view tag) {
        std::uint64_t s = seed ^ fnv1a64(tag);
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        return Pcg32(a, b);
    }

    std::uint32_t next_u32() {
        std::uint64_t old = state_;
        state_ = old * 6364136223846793005ULL + inc_;
        std::uint32_t xorshifted =
            static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
        std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
        return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform double in [0, 1), 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound) without modulo bias.
    std::uint32_t next_below(std::uint32_t bound) {
        std::uint32_t threshold = (-bound) % bound;
        for (;;) {
            std::uint32_t r = next_u32();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_;
    std::uint64_t inc_;
};

/// Fisher-Yates permutation of {0, .., n-1}.
inline std::vector<std::size_t> random_permutation(std::size_t n, Pcg32& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = rng.next_below(static_cast<std::uint32_t>(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

/// Kahan compensated accumulator for long sums of small terms.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace opacity

#endif
