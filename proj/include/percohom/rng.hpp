#pragma once

// Seeded random streams. Every consumer of randomness receives an explicit
// 64-bit seed; there is no global generator.
//
// Seed splitting rule: the k-th child of seed s is the k-th output of a
// SplitMix64 stream started at s, i.e. mix64(s + (k + 1) * 0x9e3779b97f4a7c15).
// Nested splits compose: derive_seed(derive_seed(master, replica), purpose).

#include <cmath>
#include <cstdint>
#include <limits>

namespace percohom {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed + (stream + 1) * kGoldenGamma);
}

/// Named purposes for child streams, so that e.g. point positions and ball
/// radii of one replica never share a stream.
enum class Stream : std::uint64_t {
    points = 1,
    radii = 2,
    edges = 3,
    probes = 4,
    tube_radii = 5,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream s) noexcept {
    return derive_seed(seed, static_cast<std::uint64_t>(s));
}

class SplitMix64 {
  public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

  private:
    std::uint64_t state_;
};

/// xoshiro256** 1.0 (Blackman & Vigna), state filled from SplitMix64.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return next(); }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Poisson(mean). Inversion by sequential search for mean <= 30,
    /// Hormann's transformed rejection (PTRS) above.
    std::uint64_t poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        if (mean <= 30.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t poisson_inversion(double mean) {
        double p = std::exp(-mean);
        double cdf = p;
        const double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            const double next_cdf = cdf + p;
            if (next_cdf == cdf) break; // tail underflow
            cdf = next_cdf;
        }
        return k;
    }

    std::uint64_t poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double loglam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::fabs(u);
            const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
            if (kd < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
                -mean + kd * loglam - std::lgamma(kd + 1.0)) {
                return static_cast<std::uint64_t>(kd);
            }
        }
    }

    std::uint64_t s_[4];
};

/// Counter-based uniform for a pair (i, j): independent of visiting order.
inline double pair_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j) noexcept {
    const std::uint64_t h = mix64(derive_seed(seed, i) ^ mix64(j + kGoldenGamma));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

} // namespace percohom
