#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "csl/ensemble.hpp"
#include "csl/rng.hpp"

using namespace csl;

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox, KnownAnswers) {
  using B = std::array<std::uint32_t, 4>;
  EXPECT_EQ(Philox4x32::block(B{0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::block(B{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::block(B{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, Deterministic) {
  Philox4x32 a(42, 3), b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Philox, StreamsAndSeedsDiffer) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (std::uint64_t stream = 0; stream < 16; ++stream) firsts.insert(Philox4x32(seed, stream)());
  EXPECT_EQ(firsts.size(), 64u);
}

TEST(Philox, UniformBitBalance) {
  Philox4x32 g(1, 0);
  std::array<int, 64> ones{};
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto v = g();
    for (int b = 0; b < 64; ++b) ones[b] += static_cast<int>((v >> b) & 1u);
  }
  // each bit is Binomial(n, 1/2); 5 sigma band
  for (int b = 0; b < 64; ++b) EXPECT_NEAR(ones[b], n / 2, 5.0 * std::sqrt(n / 4.0)) << b;
}

TEST(NormalStream, Moments) {
  NormalStream z(9, 1);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = z();
    s1 += v;
    s2 += v * v;
    s4 += v * v * v * v;
  }
  EXPECT_NEAR(s1 / n, 0.0, 5.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 5.0 * std::sqrt(96.0 / n));
}

TEST(ParallelMap, OrderedAndIndependentOfWorkerCount) {
  auto fn = [](std::size_t i) {
    NormalStream z(5, i);
    double s = 0;
    for (int k = 0; k < 100; ++k) s += z();
    return s;
  };
  const auto serial = parallel_map(37, fn, 1);
  for (unsigned w : {2u, 3u, 8u}) EXPECT_EQ(parallel_map(37, fn, w), serial);
}

TEST(ParallelMap, RethrowsLowestIndexFailure) {
  auto fn = [](std::size_t i) -> int {
    if (i == 5 || i == 11) throw Error(ErrorCode::NonFinite, "boom " + std::to_string(i));
    return static_cast<int>(i);
  };
  for (unsigned w : {1u, 4u}) {
    try {
      parallel_map(20, fn, w);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.detail(), "boom 5");
    }
  }
}

TEST(ParallelMap, EmptyRange) { EXPECT_TRUE(parallel_map(0, [](std::size_t i) { return i; }, 4).empty()); }
