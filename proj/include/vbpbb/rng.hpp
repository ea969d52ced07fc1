#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace vbpbb {

// Deterministic, platform-independent random streams.
//
// Engine: xoshiro256++ with state expanded from a 64-bit seed by SplitMix64.
// Stream splitting: child(domain, index) derives an independent stream from
// (seed, domain, index) with SplitMix64 mixing, so children can be created
// in any order, including concurrently, without touching the parent state.
// The samplers (uniform, bounded integer, normal, gamma) are implemented
// here instead of using <random> distributions, whose output is not
// specified by the standard and differs between library implementations.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Domain tags keep derived streams disjoint even under one master seed.
enum class StreamDomain : std::uint64_t {
    noise_term = 1,    // one stream per noise term, indexed by term position
    noise_select = 2,  // mixture-component selector stream
    replicate = 3,     // one stream per bootstrap replicate row, indexed by b
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& s : state_) s = splitmix64_next(sm);
    }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Child stream derived from (seed, domain, index); independent of how
    /// much of this stream has been consumed.
    Rng child(StreamDomain domain, std::uint64_t index) const {
        std::uint64_t s = seed_;
        std::uint64_t h = splitmix64_next(s);
        s = h ^ (static_cast<std::uint64_t>(domain) * 0xD6E8FEB86659FD93ull);
        h = splitmix64_next(s);
        s = h ^ (index * 0xCA5A826395121157ull);
        return Rng(splitmix64_next(s));
    }

    /// Uniform double in [0, 1), 53 random bits.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Unbiased uniform integer in [0, n). Lemire's multiply-with-rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: bound must be positive");
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    /// Gaussian draw via Box-Muller; consumes exactly two uniforms per call
    /// (the second variate of the pair is discarded to keep consumption flat).
    double normal(double mean, double sd) {
        if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean))
            throw std::invalid_argument("Rng::normal: need finite mean and sd > 0");
        const double u1 = 1.0 - unit();  // (0, 1], keeps log finite
        const double u2 = unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * (r * std::cos(2.0 * std::numbers::pi * u2));
    }

    /// Gamma draw, Marsaglia-Tsang squeeze method; shape < 1 boosted through
    /// gamma(shape + 1) * u^(1/shape).
    double gamma(double shape, double scale) {
        if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale))
            throw std::invalid_argument("Rng::gamma: need finite shape > 0 and scale > 0");
        if (shape < 1.0) {
            const double u = 1.0 - unit();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double z, v;
            do {
                z = normal(0.0, 1.0);
                v = 1.0 + c * z;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = 1.0 - unit();
            if (u < 1.0 - 0.0331 * (z * z) * (z * z)) return scale * (d * v);
            if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return scale * (d * v);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
};

}  // namespace vbpbb
