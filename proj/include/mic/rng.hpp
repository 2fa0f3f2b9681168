#ifndef MIC_RNG_HPP
#define MIC_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace mic {

// Deterministic PRNG used everywhere a draw happens. splitmix64 steps plus
// rejection-free-ish bounded draws; no <random> distributions, whose output
// is implementation-defined and would break cross-platform byte determinism.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n). n must be nonzero.
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling over the largest multiple of n that fits in 2^64.
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

namespace detail {

inline std::uint64_t fnv1a_seed() { return 0xcbf29ce484222325ull; }

inline void fnv1a_feed(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) h = (h ^ p[i]) * 0x100000001b3ull;
}

inline void stream_feed(std::uint64_t& h, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    fnv1a_feed(h, bytes, 8);
}

inline void stream_feed(std::uint64_t& h, std::string_view s) {
    stream_feed(h, static_cast<std::uint64_t>(s.size()));
    fnv1a_feed(h, s.data(), s.size());
}

}  // namespace detail

/// Derives an independent substream from a root seed and a key path.
/// Equal keys give equal streams; the stream is a pure function of its inputs,
/// never of scheduling or wall clock.
template <typename... Parts>
rng subrng(std::uint64_t seed, const Parts&... parts) {
    std::uint64_t h = detail::fnv1a_seed();
    detail::stream_feed(h, seed);
    (detail::stream_feed(h, parts), ...);
    return rng(h);
}

/// In-place Fisher-Yates shuffle driven by `g`.
template <typename T>
void shuffle(std::vector<T>& v, rng& g) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(g.below(i));
        if (j != i - 1) std::swap(v[i - 1], v[j]);
    }
}

}  // namespace mic

#endif  // MIC_RNG_HPP
