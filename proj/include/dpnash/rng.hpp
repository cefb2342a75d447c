#pragma once

// Seed derivation and the unit Laplace primitive. Every Monte Carlo run owns
// an independent mt19937_64 stream seeded by derive_seed(root, cell, run), so
// campaigns are reproducible per cell and per run regardless of scheduling.

#include <cmath>
#include <cstdint>
#include <random>

namespace dpnash {

// splitmix64 finalizer (Steele/Lea/Flood).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

// One splitmix64 step: advances the state by the golden-gamma and finalizes.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    return mix64(state);
}

// Documented mixing function: root, cell and run are folded in one at a time
// through the splitmix64 finalizer with distinct offset constants.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t cell, std::uint64_t run) {
    std::uint64_t h = mix64(root + 0x9E3779B97F4A7C15ULL);
    h = mix64(h ^ (cell + 0xBF58476D1CE4E5B9ULL));
    h = mix64(h ^ (run + 0x94D049BB133111EBULL));
    return h;
}

// Uniform draw on (0,1), both endpoints excluded (53-bit mantissa + half-ulp offset).
inline double uniform01(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unit-scale Laplace draw by CDF inversion: gamma = -sign(u) ln(1 - 2|u|),
// u uniform on (-1/2, 1/2). Multiply by sigma for Lap(0, 2 sigma^2).
inline double unit_laplace(std::mt19937_64& rng) {
    const double u = uniform01(rng) - 0.5;
    const double s = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    return -s * std::log(1.0 - 2.0 * std::abs(u));
}

}  // namespace dpnash
