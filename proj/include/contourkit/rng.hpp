#pragma once

#include <cstdint>
#include <initializer_list>

namespace contourkit {

namespace detail {

/// SplitMix64 finalizer (Steele, Lea, Flood). Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

/// Derives a stream key from a seed and salts, e.g. derive_key(seed, sample_id,
/// attempt). Retries and parallel workers get disjoint streams from the same
/// master seed.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> salts) {
    std::uint64_t k = detail::mix64(seed);
    for (std::uint64_t s : salts) k = detail::mix64(k ^ (s + 0x9E3779B97F4A7C15ull));
    return k;
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a) {
    return derive_key(seed, {a});
}
inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_key(seed, {a, b});
}

/// Counter-based generator: output(n) = mix64(key + n * gamma). All draws are a
/// pure function of (key, draw index), so identical keys replay identical
/// streams on any platform. No libc or std distribution involved anywhere.
class RngStream {
public:
    explicit RngStream(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + uniform01() * (hi - lo);
    }

    /// Uniform integer in [lo, hi] inclusive, via 128-bit scaling. Bias is
    /// below 2^-32 for the small ranges used here.
    int uniform_int(int lo, int hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t r = next_u64();
        const std::uint64_t scaled =
            static_cast<std::uint64_t>((static_cast<unsigned __int128>(r) * range) >> 64);
        return lo + static_cast<int>(scaled);
    }

    /// Fair coin: true with probability 0.5.
    bool coin() { return uniform01() < 0.5; }

    /// Signed 16-bit noise sample in [-32768, 32767]; used for the elastic
    /// displacement fields where exact integer smoothing is wanted.
    std::int32_t noise16() {
        return static_cast<std::int32_t>(next_u64() >> 48) - 32768;
    }

private:
    std::uint64_t state_;
};

} // namespace contourkit
