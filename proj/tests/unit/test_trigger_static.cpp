#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cwfd/seqdist.hpp"
#include "cwfd/trigger_static.hpp"
#include "gen.hpp"
#include "oracles.hpp"

namespace cwfd {
namespace {

using namespace testing;

TEST(StaticOptConfig, Validation) {
  StaticOptConfig c;
  EXPECT_NO_THROW(c.validate());
  c.bursts = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.bursts = 30;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(StaticObjective, MatchesOracle) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto x = testing::random_trace(rng, 1 + rng.index(30));
    const auto plan = testing::random_plan(rng, x.size(), 1 + rng.index(3), 6);
    DistanceConfig dist;
    dist.max_length = 5 + rng.index(40);
    EXPECT_EQ(static_objective(direction_sequence(x), plan, dist), oracle_objective(x, plan, dist));
  }
}

TEST(OptimizeStatic, SingleCandidate) {
  Rng rng(2);
  const auto x = testing::random_trace(rng, 12);
  StaticOptConfig c;
  c.bursts = 1;
  c.total = 9;
  const auto r = optimize_static_with_pool(x, {5}, c, {});
  EXPECT_EQ(r.plan, TriggerPlan({5}, {9}));
}

TEST(OptimizeStatic, PairMatchesExhaustiveSearch) {
  Rng rng(3);
  const auto x = testing::random_trace(rng, 10);
  StaticOptConfig c;
  c.bursts = 2;
  c.total = 4;
  for (std::size_t max_len : {10000u, 12u, 9u}) {
    DistanceConfig dist;
    dist.max_length = max_len;
    const auto r = optimize_static_with_pool(x, all_indices(10), c, dist);
    EXPECT_EQ(r.score, brute_force_best(x, 2, 4, dist)) << max_len;
    EXPECT_EQ(r.score, oracle_objective(x, r.plan, dist));
  }
}

TEST(OptimizeStatic, SmallInstancesAgainstBruteForce) {
  Rng rng(4);
  int optimal = 0, cases = 0;
  for (int i = 0; i < 40; ++i) {
    const auto x = testing::random_trace(rng, 4 + rng.index(9));
    StaticOptConfig c;
    c.bursts = 1 + rng.index(std::min<std::size_t>(3, x.size()));
    c.pool_size = x.size();
    c.total = rng.index(10);
    DistanceConfig dist;
    dist.max_length = x.size() + rng.index(c.total + 1);
    const auto r = optimize_static_with_pool(x, all_indices(x.size()), c, dist);
    const double best = brute_force_best(x, c.bursts, c.total, dist);
    EXPECT_LE(r.score, best);
    optimal += r.score == best;
    ++cases;
  }
  EXPECT_GE(optimal, cases * 9 / 10);
}

TEST(OptimizeStatic, TrajectoryNonDecreasingAndBudgetExact) {
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const auto x = testing::random_trace(rng, 20 + rng.index(100));
    StaticOptConfig c;
    c.total = rng.index(300);
    c.rng_seed = i;
    DistanceConfig dist;
    dist.max_length = x.size() + rng.index(c.total + 1);
    const auto r = optimize_static(x, c, dist);
    EXPECT_EQ(r.plan.total(), c.total);
    EXPECT_EQ(r.plan.size(), c.bursts);
    EXPECT_TRUE(std::is_sorted(r.trajectory.begin(), r.trajectory.end()));
    EXPECT_GE(r.score, r.trajectory.back());
    EXPECT_TRUE(r.warnings.empty());
  }
}

TEST(OptimizeStatic, DegenerateObjectiveBreaksTiesLow) {
  // Without truncation every insertion-only plan scores its total, so the
  // lowest pool indices win.
  Rng rng(6);
  const auto x = testing::random_trace(rng, 50);
  StaticOptConfig c;
  c.bursts = 3;
  c.total = 30;
  const auto r = optimize_static_with_pool(x, {40, 7, 22, 3, 15}, c, {});
  EXPECT_EQ(r.plan.locations(), (std::vector<std::size_t>{3, 7, 15}));
  EXPECT_EQ(r.score, 30.0);
}

TEST(OptimizeStatic, Deterministic) {
  Rng rng(7);
  const auto x = testing::random_trace(rng, 80);
  StaticOptConfig c;
  c.total = 50;
  c.rng_seed = 99;
  DistanceConfig dist;
  dist.max_length = 100;
  const auto a = optimize_static(x, c, dist), b = optimize_static(x, c, dist);
  EXPECT_EQ(a.plan, b.plan);
  EXPECT_EQ(a.score, b.score);
}

TEST(OptimizeStatic, PlanDrawnFromPool) {
  Rng rng(8);
  const auto x = testing::random_trace(rng, 200);
  StaticOptConfig c;
  c.total = 70;
  c.rng_seed = 3;
  const auto r = optimize_static(x, c, {});
  Rng pool_rng(c.rng_seed);
  const auto pool = pool_rng.sample_without_replacement(x.size(), c.pool_size);
  for (auto k : r.plan.locations()) EXPECT_NE(std::find(pool.begin(), pool.end(), k), pool.end());
}

TEST(OptimizeStatic, ShortPoolReducesBursts) {
  Rng rng(9);
  const auto x = testing::random_trace(rng, 4);
  StaticOptConfig c;
  c.total = 10;
  const auto r = optimize_static(x, c, {});
  EXPECT_EQ(r.plan.size(), 4u);
  EXPECT_EQ(r.plan.total(), 10u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(OptimizeStatic, EmptyTraceThrows) {
  EXPECT_THROW(optimize_static(Trace(), StaticOptConfig{}, {}), std::invalid_argument);
}

}  // namespace
}  // namespace cwfd
