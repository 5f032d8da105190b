#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rankot {

// splitmix64 step; used to mix seeds into independent stream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream key for (seed, task, replicate). All randomness in the
// library flows through this so replicate loops can run in any order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task,
                                 std::uint64_t replicate = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= task * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(s);
    s ^= replicate * 0xda942042e4dd58b5ULL + 1;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1 | b >> 63) ^ c;
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t task = 0,
                                std::uint64_t replicate = 0) {
    return std::mt19937_64(derive_seed(seed, task, replicate));
}

// Hand-rolled variate transforms below keep generated fixtures stable across
// standard-library versions (std::*_distribution sequences are unspecified).

// Uniform on [0, 1) with 53-bit resolution.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1]; safe as a logarithm argument.
inline double uniform01_open_left(std::mt19937_64& rng) {
    return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

// Standard normal via Box-Muller, one variate per call (no pair caching, so
// streams stay aligned regardless of call sites).
inline double sample_normal(std::mt19937_64& rng) {
    const double u1 = uniform01_open_left(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

inline double sample_exponential(std::mt19937_64& rng) { return -std::log(uniform01_open_left(rng)); }

// Cauchy(location, scale) via the tangent transform.
inline double sample_cauchy(std::mt19937_64& rng, double location, double scale) {
    return location + scale * std::tan(3.14159265358979323846 * (uniform01(rng) - 0.5));
}

// Gamma with shape 2 as a sum of two exponentials.
inline double sample_gamma_shape2(std::mt19937_64& rng, double scale) {
    return scale * (sample_exponential(rng) + sample_exponential(rng));
}

// Laplace(location, scale) via the inverse CDF: x = loc - scale * sgn(u) * ln(1 - 2|u|).
inline double sample_laplace(std::mt19937_64& rng, double location, double scale) {
    const double u = uniform01(rng) - 0.5;
    const double sign = u >= 0.0 ? 1.0 : -1.0;
    return location - scale * sign * std::log(1.0 - 2.0 * std::abs(u));
}

inline bool sample_bernoulli(std::mt19937_64& rng, double p) { return uniform01(rng) < p; }

} // namespace rankot
