#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>

#include <covkit/philox.hpp>

using namespace covkit::rng;

// Published known-answer vectors for the 10-round 4x32 generator.
TEST_CASE("philox known-answer vectors") {
  SUBCASE("zero counter and key") {
    const Counter out = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }

  SUBCASE("all-ones counter and key") {
    const Counter out = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                   {0xffffffffu, 0xffffffffu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
  }

  SUBCASE("pi-digit counter and key") {
    const Counter out = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                   {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("gaussian stream substructure") {
  SUBCASE("same (seed, lane, index) always reproduces the same pair") {
    const GaussianStream s1(42, 3, kDomainPairBin);
    const GaussianStream s2(42, 3, kDomainPairBin);
    for (std::uint64_t i : {0ull, 1ull, 17ull, 123456789ull, (1ull << 40) + 5}) {
      const auto a = s1.normal_pair(i);
      const auto b = s2.normal_pair(i);
      CHECK(a[0] == b[0]);
      CHECK(a[1] == b[1]);
    }
  }

  SUBCASE("different lanes, seeds and domains decorrelate") {
    const GaussianStream base(42, 3, kDomainPairBin);
    const GaussianStream lane(42, 4, kDomainPairBin);
    const GaussianStream seed(43, 3, kDomainPairBin);
    const GaussianStream dom(42, 3, kDomainSoloBin);
    int same = 0;
    for (std::uint64_t i = 0; i < 64; ++i) {
      const auto a = base.normal_pair(i);
      if (a[0] == lane.normal_pair(i)[0]) ++same;
      if (a[0] == seed.normal_pair(i)[0]) ++same;
      if (a[0] == dom.normal_pair(i)[0]) ++same;
    }
    CHECK(same == 0);
  }

  SUBCASE("pairs are standard normal to statistical accuracy") {
    const GaussianStream s(2024, 0, kDomainOracle);
    const std::size_t n = 500'000;
    double sum = 0, sumsq = 0, sumxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = s.normal_pair(i);
      sum += z[0] + z[1];
      sumsq += z[0] * z[0] + z[1] * z[1];
      sumxy += z[0] * z[1];
    }
    const double n2 = 2.0 * static_cast<double>(n);
    CHECK(std::abs(sum / n2) < 5.0 / std::sqrt(n2));              // mean ~ 0
    CHECK(std::abs(sumsq / n2 - 1.0) < 5.0 * std::sqrt(2.0 / n2));  // var ~ 1
    CHECK(std::abs(sumxy / n) < 5.0 / std::sqrt(static_cast<double>(n)));
  }

  SUBCASE("uniform mapping keeps 53-bit resolution and the half-open range") {
    CHECK(uniform_from_bits(0) == 0.0);
    CHECK(uniform_from_bits(~0ull) < 1.0);
    CHECK(uniform_from_bits(~0ull) == doctest::Approx(1.0).epsilon(1e-15));
  }
}
