#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace driftarrival::simulate {

/// Philox 4x32, 10 rounds (Salmon et al. 2011): a keyed counter block
/// cipher. Each (key, counter) cell yields 128 independent bits, so any
/// worker can jump straight to any particle and step without sequencing.
struct Philox4x32 {
  static constexpr std::uint32_t kKeyStepA = 0x9E3779B9u;
  static constexpr std::uint32_t kKeyStepB = 0xBB67AE85u;
  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;

  static std::array<std::uint32_t, 4> block(std::uint64_t key,
                                            std::uint64_t ctr_hi,
                                            std::uint64_t ctr_lo) noexcept {
    std::uint32_t x0 = static_cast<std::uint32_t>(ctr_lo);
    std::uint32_t x1 = static_cast<std::uint32_t>(ctr_lo >> 32);
    std::uint32_t x2 = static_cast<std::uint32_t>(ctr_hi);
    std::uint32_t x3 = static_cast<std::uint32_t>(ctr_hi >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * x0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * x2;
      const std::uint32_t y0 =
          static_cast<std::uint32_t>(p1 >> 32) ^ x1 ^ k0;
      const std::uint32_t y1 = static_cast<std::uint32_t>(p1);
      const std::uint32_t y2 =
          static_cast<std::uint32_t>(p0 >> 32) ^ x3 ^ k1;
      const std::uint32_t y3 = static_cast<std::uint32_t>(p0);
      x0 = y0;
      x1 = y1;
      x2 = y2;
      x3 = y3;
      k0 += kKeyStepA;
      k1 += kKeyStepB;
    }
    return {x0, x1, x2, x3};
  }

  /// The 128-bit output as two 64-bit words.
  static std::array<std::uint64_t, 2> words64(std::uint64_t key,
                                              std::uint64_t ctr_hi,
                                              std::uint64_t ctr_lo) noexcept {
    const auto b = block(key, ctr_hi, ctr_lo);
    return {static_cast<std::uint64_t>(b[0]) | (static_cast<std::uint64_t>(b[1]) << 32),
            static_cast<std::uint64_t>(b[2]) | (static_cast<std::uint64_t>(b[3]) << 32)};
  }
};

/// Maps 64 random bits to (0, 1), never touching either endpoint: the top
/// 53 bits index a cell midpoint on a 2^-53 grid.
inline double uniform_from_bits(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

struct NormalPair {
  double z0, z1;
};

/// Box-Muller transform of one 128-bit cell into two standard normals.
inline NormalPair box_muller(std::uint64_t a, std::uint64_t b) noexcept {
  const double r = std::sqrt(-2.0 * std::log(uniform_from_bits(a)));
  const double angle = 2.0 * std::numbers::pi * uniform_from_bits(b);
  return {r * std::cos(angle), r * std::sin(angle)};
}

}  // namespace driftarrival::simulate
