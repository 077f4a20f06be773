#pragma once

#include <cstdint>
#include <random>

namespace sfl {

using Rng = std::mt19937_64;

// Independent stream for worker `index` under a run seed. Streams are a pure
// function of (seed, index), so parallel tasks replay identically.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

}  // namespace sfl
