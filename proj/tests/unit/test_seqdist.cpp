#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "cwfd/injector.hpp"
#include "cwfd/seqdist.hpp"
#include "gen.hpp"

namespace cwfd {
namespace {

using Seq = std::vector<Direction>;

// Textbook recursive definition, memoized; independent of the two-row DP.
double reference_distance(const Seq& a, const Seq& b, const DistanceConfig& c) {
  std::vector<std::vector<double>> memo(a.size() + 1, std::vector<double>(b.size() + 1, -1.0));
  std::function<double(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> double {
    if (memo[i][j] >= 0) return memo[i][j];
    double r;
    if (i == 0) {
      r = static_cast<double>(j) * c.insertion;
    } else if (j == 0) {
      r = static_cast<double>(i) * c.deletion;
    } else {
      r = std::min({go(i - 1, j) + c.deletion, go(i, j - 1) + c.insertion,
                    go(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0.0 : c.substitution)});
    }
    return memo[i][j] = r;
  };
  return go(a.size(), b.size());
}

TEST(DistanceConfig, Validation) {
  DistanceConfig c;
  EXPECT_NO_THROW(c.validate());
  c.insertion = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.substitution = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(LevenshteinFull, Examples) {
  EXPECT_EQ(levenshtein_full(Seq{1, -1, 1}, Seq{1, -1, 1}), 0.0);
  EXPECT_EQ(levenshtein_full(Seq{1, -1, 1}, Seq{1, -1, -1, 1}), 1.0);
  EXPECT_EQ(levenshtein_full(Seq{}, Seq{-1, -1}), 2.0);
  EXPECT_EQ(levenshtein_full(Seq{-1, -1}, Seq{}), 2.0);
}

TEST(LevenshteinFull, MatchesRecursiveReferenceWithWeights) {
  Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    DistanceConfig c;
    c.insertion = rng.uniform(0.2, 3.0);
    c.deletion = rng.uniform(0.2, 3.0);
    c.substitution = rng.uniform(0.2, 3.0);
    const auto a = testing::random_directions(rng, rng.index(20));
    const auto b = testing::random_directions(rng, rng.index(20));
    EXPECT_NEAR(levenshtein_full(a, b, c), reference_distance(a, b, c), 1e-9);
  }
}

TEST(FastLev, Examples) {
  const Seq a{1, 1}, b{-1, -1};
  DistanceConfig c;
  c.band_width = 0;
  EXPECT_EQ(fast_lev(a, b, c), 2.0);
  Rng rng(1);
  const auto x = testing::random_directions(rng, 300);
  EXPECT_EQ(fast_lev(x, x), 0.0);
  EXPECT_EQ(fast_lev(Seq{}, Seq{-1, -1, -1}), 3.0);
  EXPECT_EQ(fast_lev(Seq{}, Seq{}), 0.0);
}

TEST(FastLev, EqualsFullWhenBandCoversDistance) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_directions(rng, rng.index(65));
    const auto b = testing::random_directions(rng, rng.index(65));
    const double full = levenshtein_full(a, b);
    DistanceConfig c;
    c.band_width = static_cast<std::size_t>(full);
    EXPECT_EQ(fast_lev(a, b, c), full);
  }
}

TEST(FastLev, BandDominance) {
  Rng rng(3);
  for (std::size_t band : {0u, 1u, 2u, 5u, 8u}) {
    for (int i = 0; i < 200; ++i) {
      const auto a = testing::random_directions(rng, rng.index(65));
      const auto b = testing::random_directions(rng, rng.index(65));
      DistanceConfig c;
      c.band_width = band;
      EXPECT_GE(fast_lev(a, b, c), levenshtein_full(a, b));
    }
  }
}

TEST(FastLev, SymmetricWithUnitCosts) {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_directions(rng, rng.index(80));
    const auto b = testing::random_directions(rng, rng.index(80));
    DistanceConfig c;
    c.band_width = rng.index(10);
    EXPECT_EQ(fast_lev(a, b, c), fast_lev(b, a, c));
    EXPECT_GE(fast_lev(a, b, c), 0.0);
  }
}

TEST(FastLev, SingleBurstCostsItsLength) {
  Rng rng(5);
  for (std::size_t k : {0u, 1u, 5u, 40u, 200u}) {
    const auto x = testing::random_trace(rng, 150);
    const auto xh = inject(x, TriggerPlan({rng.index(151)}, {k}));
    DistanceConfig c;
    c.band_width = 8;
    EXPECT_GE(fast_lev(x, xh, c), static_cast<double>(k));
    EXPECT_EQ(fast_lev(x, xh, c), static_cast<double>(k));
  }
}

TEST(FastLev, TruncatesToMaxLength) {
  Seq a(30, 1), b(30, 1);
  b[25] = -1;
  DistanceConfig c;
  EXPECT_EQ(fast_lev(a, b, c), 1.0);
  c.max_length = 20;
  EXPECT_EQ(fast_lev(a, b, c), 0.0);
}

TEST(FastLev, TraceOverloadUsesDirections) {
  const Trace x({{0.0, kOutgoing}, {0.3, kIncoming}});
  const Trace y({{5.0, kOutgoing}, {9.0, kIncoming}});
  EXPECT_EQ(fast_lev(x, y), 0.0);
}

}  // namespace
}  // namespace cwfd
