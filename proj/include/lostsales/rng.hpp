#pragma once

#include <cstdint>
#include <random>

namespace lostsales {

using Rng = std::mt19937_64;

// Substream derivation rule: an independent stream is identified by the
// pair (seed, stream index). The same pair always yields the same stream,
// so parallel Monte Carlo can hand stream k to replication k and stay
// reproducible regardless of scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

// Uniform double in [0, 1) from the top 53 bits. std::uniform_real_distribution
// is implementation-defined, which would break the bitwise replay contract.
inline double unit_double(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace lostsales
