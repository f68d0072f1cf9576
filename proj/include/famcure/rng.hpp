#pragma once

// Seedable RNG with splittable per-family streams. Draws are produced by
// inverse transform wherever a quantile routine exists, so output is
// reproducible across platforms and independent of evaluation order.

#include <cstdint>
#include <stdexcept>

#include "famcure/special.hpp"

namespace famcure {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ (Blackman & Vigna, public domain reference implementation).
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    /// Stream for one simulation unit, keyed on (seed, stream index) so
    /// parallel generation is order-independent.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        std::uint64_t sm = seed;
        const std::uint64_t mixed = splitmix64(sm) ^ (0x9e3779b97f4a7c15ULL * (index + 1));
        std::uint64_t sm2 = mixed;
        return Rng(splitmix64(sm2));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform on (0,1): 53-bit mantissa, shifted so 0 is never returned.
    double uniform() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u + 0x1.0p-54;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_quantile(uniform()); }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    /// Gamma(shape, rate) by inverse transform through the regularized
    /// incomplete gamma inverse.
    double gamma(double shape, double rate) {
        return gamma_quantile(shape, rate, uniform());
    }

    /// Poisson(lambda) by CDF inversion; adequate for the small means used here.
    int poisson(double lambda) {
        if (!(lambda >= 0.0)) throw std::invalid_argument("poisson: lambda must be >= 0");
        if (lambda == 0.0) return 0;
        const double u = uniform();
        double pk = std::exp(-lambda);
        double cdf = pk;
        int k = 0;
        while (u > cdf && k < 10000) {
            ++k;
            pk *= lambda / k;
            cdf += pk;
        }
        return k;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4]{};
};

} // namespace famcure
