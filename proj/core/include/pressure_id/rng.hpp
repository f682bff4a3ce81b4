#pragma once

#include <cstdint>
#include <random>

namespace pressure_id {

/// Independent, reproducible generator for one named purpose derived from a run seed.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a = 0,
                                std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

}  // namespace pressure_id
