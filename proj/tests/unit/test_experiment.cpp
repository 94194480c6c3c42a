#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "cwfd/experiment.hpp"
#include "cwfd/synth.hpp"
#include "cwfd/util.hpp"

namespace cwfd {
namespace {

namespace fs = std::filesystem;

TEST(Config, ParseAndOverride) {
  const auto c = ExperimentConfig::parse(
      "# comment\n[trigger]\ntype = dynamic\nweight=light\n\n[poison]\nrate = 0.05 # trailing\n");
  EXPECT_EQ(c.get("trigger.type"), "dynamic");
  EXPECT_EQ(c.get("trigger.weight"), "light");
  EXPECT_EQ(c.get("poison.rate"), "0.05");
  EXPECT_EQ(c.get("trigger.bursts"), "7");
  auto d = c;
  d.apply_override("poison.rate=0.2");
  EXPECT_EQ(d.get("poison.rate"), "0.2");
  EXPECT_THROW(d.apply_override("poison.rate"), std::invalid_argument);
  EXPECT_THROW(d.set("poison.nope", "1"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse("[poison]\nnope = 1\n"), std::invalid_argument);
  EXPECT_THROW(ExperimentConfig::parse("[poison\n"), std::invalid_argument);
}

TEST(Config, CanonicalRoundTripAndHash) {
  auto c = ExperimentConfig::parse("[sweep]\npoison.rate = 0.01, 0.05\n[attacker]\nepochs = 10\n");
  const auto again = ExperimentConfig::parse(c.canonical_text());
  EXPECT_EQ(again.canonical_text(), c.canonical_text());
  EXPECT_EQ(again.hash(), c.hash());
  EXPECT_EQ(c.hash_hex().size(), 16u);

  auto moved = c;
  moved.set("run.out", "/elsewhere");
  moved.set("run.jobs", "8");
  EXPECT_EQ(moved.hash(), c.hash());
  moved.set("run.seed", "2");
  EXPECT_NE(moved.hash(), c.hash());
}

TEST(Config, SweepExpandsToGrid) {
  const auto c = ExperimentConfig::parse("[sweep]\npoison.rate = 0.01, 0.05\ntrigger.bursts = 3,5,7\n");
  const auto grid = c.expand_sweep();
  ASSERT_EQ(grid.size(), 6u);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& g : grid) {
    EXPECT_TRUE(g.sweep().empty());
    seen.insert({g.get("poison.rate"), g.get("trigger.bursts")});
  }
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_EQ(ExperimentConfig::defaults().expand_sweep().size(), 1u);
  EXPECT_THROW(ExperimentConfig::parse("[sweep]\nfoo.bar = 1,2\n"), std::invalid_argument);
}

TEST(Config, SettingsValidation) {
  const auto s = Settings::from(ExperimentConfig::defaults());
  EXPECT_EQ(s.trigger, TriggerMode::kStatic);
  EXPECT_EQ(s.bursts, 7u);
  EXPECT_EQ(s.tam.slots, 64u);
  auto c = ExperimentConfig::defaults();
  c.set("trigger.type", "wavy");
  EXPECT_THROW(Settings::from(c), std::invalid_argument);
  c = ExperimentConfig::defaults();
  c.set("eval.pill", "green");
  EXPECT_THROW(Settings::from(c), std::invalid_argument);
  c = ExperimentConfig::defaults();
  c.set("poison.rate", "abc");
  EXPECT_THROW(Settings::from(c), std::invalid_argument);
}

TEST(Budget, Resolution) {
  LabeledDataset ds;
  ds.class_count = 1;
  ds.entries.push_back({"a", Trace(std::vector<PacketEvent>(100, {0.0, kIncoming})), 0});
  ds.entries.push_back({"b", Trace(std::vector<PacketEvent>(51, {0.0, kIncoming})), 0});
  EXPECT_EQ(resolve_budget("light", ds), 4000u);
  EXPECT_EQ(resolve_budget("heavy", ds), 20000u);
  EXPECT_EQ(resolve_budget("123", ds), 123u);
  EXPECT_EQ(resolve_budget("scaled:1.0", ds), 76u);  // 75.5 rounds up
  EXPECT_EQ(resolve_budget("scaled:0.5", ds), 38u);
  EXPECT_THROW(resolve_budget("scaled:-1", ds), std::invalid_argument);
  EXPECT_THROW(resolve_budget("scaled:1", LabeledDataset{}), std::invalid_argument);
  EXPECT_THROW(resolve_budget("lots", ds), std::invalid_argument);
}

TEST(Split, EightOneOne) {
  std::array<int, 3> counts{};
  for (int i = 0; i < 20000; ++i) {
    const auto s = split_of(std::to_string(i % 100) + "-" + std::to_string(i / 100));
    ++counts[static_cast<int>(s)];
  }
  EXPECT_NEAR(counts[0] / 20000.0, 0.8, 0.02);
  EXPECT_NEAR(counts[1] / 20000.0, 0.1, 0.02);
  EXPECT_NEAR(counts[2] / 20000.0, 0.1, 0.02);
  EXPECT_EQ(split_of("3-17"), split_of("3-17"));
}

TEST(Targets, LiteralAndRandom) {
  EXPECT_EQ(resolve_targets("3", 5, 1), std::vector<int>{3});
  EXPECT_THROW(resolve_targets("5", 5, 1), std::invalid_argument);
  const auto r = resolve_targets("random:4", 10, 7);
  EXPECT_EQ(r.size(), 4u);
  EXPECT_EQ(std::set<int>(r.begin(), r.end()).size(), 4u);
  for (int t : r) EXPECT_TRUE(t >= 0 && t < 10);
  EXPECT_EQ(r, resolve_targets("random:4", 10, 7));
}

TEST(Summarize, MeanAndSampleStd) {
  std::vector<EvalReport> rs(3);
  rs[0].clean_accuracy = 90;
  rs[1].clean_accuracy = 80;
  rs[2].clean_accuracy = 70;
  const auto s = summarize(rs);
  EXPECT_EQ(s.at("clean_accuracy_mean"), "80");
  EXPECT_EQ(s.at("clean_accuracy_std"), "10");
  EXPECT_EQ(s.at("runs"), "3");
  EXPECT_FALSE(s.contains("red_pill_target_rate_mean"));
}

TEST(StageFailure, WrapsErrors) {
  try {
    run_stage("poison", []() -> int { throw std::runtime_error("boom"); });
    FAIL();
  } catch (const StageFailure& e) {
    EXPECT_EQ(e.stage(), "poison");
    EXPECT_STREQ(e.what(), "boom");
  }
}

class SmallRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "cwfd_experiment_test";
    fs::remove_all(root_);
    SynthConfig s;
    s.classes = 3;
    s.per_class = 40;
    save_dataset(make_synthetic_corpus(s), root_ / "data");
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static ExperimentConfig config(const std::string& out) {
    auto c = ExperimentConfig::defaults();
    c.set("dataset.path", (root_ / "data").string());
    c.set("run.out", (root_ / out).string());
    c.set("trigger.weight", "100");
    c.set("trigger.pool_size", "10");
    c.set("trigger.bursts", "3");
    c.set("trigger.iterations", "1");
    c.set("poison.rate", "0.1");
    c.set("attacker.epochs", "50");
    return c;
  }

  static fs::path root_;
};
fs::path SmallRun::root_;

TEST_F(SmallRun, RepeatedRunsAreIdentical) {
  if (std::getenv("CWFD_OUT_ROOT")) GTEST_SKIP();
  const auto a = run_experiment(config("a"));
  const auto b = run_experiment(config("b"));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].summary, b[0].summary);
  for (const char* f : {"report.txt", "attacker.bin", "poisoned.txt", "plans_train.txt"}) {
    EXPECT_EQ(read_file(a[0].dir / "target-0" / f), read_file(b[0].dir / "target-0" / f)) << f;
  }
  EXPECT_TRUE(fs::exists(a[0].dir.parent_path() / "manifest.txt") || fs::exists(a[0].dir / "manifest.txt"));
  EXPECT_TRUE(a[0].reports[0].red_pill_target_rate.has_value());
}

TEST_F(SmallRun, BluePillReportsNoTargetRate) {
  if (std::getenv("CWFD_OUT_ROOT")) GTEST_SKIP();
  auto c = config("blue");
  c.set("eval.pill", "blue");
  const auto out = run_experiment(c);
  const auto& r = out[0].reports[0];
  EXPECT_FALSE(r.red_pill_target_rate.has_value());
  EXPECT_EQ(r.extra.at("blue_pill_identical"), "1");
}

TEST_F(SmallRun, MissingDatasetNamesIngest) {
  auto c = config("missing");
  c.set("dataset.path", (root_ / "nowhere").string());
  try {
    run_experiment(c);
    FAIL();
  } catch (const StageFailure& e) {
    EXPECT_EQ(e.stage(), "ingest");
  }
}

}  // namespace
}  // namespace cwfd
