// Counter-based random numbers: Philox4x32-10 plus a Gaussian stream on top.
//
// Each 128-bit counter/64-bit key pair maps to four independent 32-bit words,
// so sample i of lane (bin) b under seed s is a pure function of (s, b, i).
// That gives bit-identical reproducibility for a given seed on one platform
// regardless of execution order or thread count, cheap skip-ahead, and
// independent substreams per spectral bin.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace covkit::rng {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key, int rounds = 10) {
  for (int r = 0; r < rounds; ++r) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

// Stream domains keep substreams for different purposes disjoint even when
// they share a seed and lane.
inline constexpr std::uint32_t kDomainSoloBin = 0x534F4C4Fu;
inline constexpr std::uint32_t kDomainPairBin = 0x50414952u;
inline constexpr std::uint32_t kDomainOracle = 0x4F52434Cu;

// Uniform double in [0, 1) from 53 random bits.
inline double uniform_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Standard-normal pairs indexed by a block counter. Block i of lane l yields
// two N(0,1) values via Box-Muller; consecutive indices are independent.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint32_t lane, std::uint32_t domain)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        lane_(lane),
        domain_(domain) {}

  std::array<std::uint32_t, 4> raw(std::uint64_t index) const {
    return philox4x32({static_cast<std::uint32_t>(index),
                       static_cast<std::uint32_t>(index >> 32), lane_, domain_},
                      key_);
  }

  std::array<double, 2> normal_pair(std::uint64_t index) const {
    const auto w = raw(index);
    const std::uint64_t hi = (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
    const std::uint64_t lo = (static_cast<std::uint64_t>(w[2]) << 32) | w[3];
    // radius from a (0, 1] uniform so the log is always finite
    const double u1 = static_cast<double>((hi >> 11) + 1) * 0x1.0p-53;
    const double u2 = uniform_from_bits(lo);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

 private:
  Key key_;
  std::uint32_t lane_;
  std::uint32_t domain_;
};

}  // namespace covkit::rng
