#ifndef QAGG_RANDOM_HPP
#define QAGG_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>

namespace qagg {

// std::mt19937_64 is fully specified by the standard; the distributions in
// <random> are not, so the two draws below are written out explicitly to keep
// seeded output identical across standard library implementations.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) built from the top 53 bits of one engine output.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection sampling; n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return static_cast<std::size_t>(draw % bound);
}

}  // namespace qagg

#endif  // QAGG_RANDOM_HPP
