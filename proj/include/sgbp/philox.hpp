#pragma once

#include <array>
#include <cstdint>

namespace sgbp {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each
/// (key, counter) pair maps to four independent 32-bit words, so random
/// streams can be addressed directly by (seed, edge, iteration, slot) without
/// any shared state.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      ctr = single_round(ctr, k);
      k[0] += 0x9E3779B9u;
      k[1] += 0xBB67AE85u;
    }
    return ctr;
  }

  /// Uniform double in the open interval (0, 1) with 53 random bits.
  double uniform(const Counter& ctr) const { return to_open_unit((*this)(ctr)); }

  static double to_open_unit(const Counter& w) {
    const std::uint64_t hi = static_cast<std::uint64_t>(w[0]) >> 5;  // 27 bits
    const std::uint64_t lo = static_cast<std::uint64_t>(w[1]) >> 6;  // 26 bits
    const std::uint64_t bits = ((hi << 26) | lo) >> 1;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
  }

 private:
  static Counter single_round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
    const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
  }

  Key key_;
};

}  // namespace sgbp
