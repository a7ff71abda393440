#pragma once

#include <cmath>
#include <random>

namespace voxfield {

// mt19937_64 plus explicit bit mappings, so seeded results are identical
// across standard libraries (std::uniform_real_distribution and
// std::normal_distribution are not portable bit-for-bit).

inline double uniform01(std::mt19937_64& rng) {
    return double(rng() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double uniform_range(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline double standard_normal(std::mt19937_64& rng) {
    // Box-Muller; u1 in (0,1] keeps the log finite.
    const double u1 = double((rng() >> 11) + 1) * 0x1.0p-53;
    const double u2 = double(rng() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace voxfield
