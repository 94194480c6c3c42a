#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwfd/attacker.hpp"
#include "cwfd/metrics.hpp"
#include "cwfd/poison.hpp"
#include "cwfd/trace.hpp"
#include "cwfd/trigger_dynamic.hpp"
#include "cwfd/trigger_static.hpp"

namespace cwfd {

/// Experiment settings as `section.key` -> value strings.
///
/// Text form is INI-like: `[section]` headers, `key = value` lines, `#`
/// comments. A `[sweep]` section maps full keys to comma-separated value
/// lists that expand into a grid of runs. Unknown keys are rejected.
class ExperimentConfig {
 public:
  /// Every known key with its default.
  static ExperimentConfig defaults();
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Overrides one key; throws std::invalid_argument for unknown keys.
  void set(const std::string& key, const std::string& value);
  /// Applies `section.key=value`.
  void apply_override(std::string_view assignment);

  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  const std::map<std::string, std::vector<std::string>>& sweep() const { return sweep_; }

  /// Sorted, defaults included; parse(canonical_text()) reproduces *this.
  std::string canonical_text() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  /// One config per grid point, with the sweep section removed.
  std::vector<ExperimentConfig> expand_sweep() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::vector<std::string>> sweep_;
};

enum class WorldMode { kClosed, kOpen };
enum class Pill { kRed, kBlue };

/// Typed view of an ExperimentConfig.
struct Settings {
  std::filesystem::path dataset;
  WorldMode world = WorldMode::kClosed;
  std::optional<std::size_t> per_class_cap;

  TriggerMode trigger = TriggerMode::kStatic;
  std::string weight;       // light, heavy, an integer, or scaled:<f>
  std::string test_weight;  // empty: same as weight
  std::size_t bursts = 7;
  std::size_t pool_size = 20;
  std::size_t iterations = 3;
  IndexRange region;

  double poison_rate = 0.01;
  std::string target;  // integer or random:<n>

  DynTrainConfig dynamic;
  DistanceConfig distance;
  TamConfig tam;
  ClassifierHyper classifier;

  Pill pill = Pill::kRed;
  bool random_removal = false;

  std::uint64_t seed = 1;
  std::filesystem::path out;
  unsigned jobs = 1;

  static Settings from(const ExperimentConfig& cfg);
};

/// light = 4000, heavy = 20000, an integer literal, or scaled:<f> meaning
/// f times the mean trace length of `reference`.
std::size_t resolve_budget(const std::string& weight, const LabeledDataset& reference);

enum class Split { kTrain, kValidation, kTest };

/// 8:1:1 by FNV-1a of the file name.
Split split_of(const std::string& name);
LabeledDataset select_split(const LabeledDataset& ds, Split split);

/// Output root: CWFD_OUT_ROOT if set, otherwise settings.out.
std::filesystem::path output_root(const Settings& settings);

/// Stage entry points used by the CLI subcommands and by run_experiment.
/// Each reads what it needs from `dir` and writes its artifacts there.
struct Stages {
  explicit Stages(Settings settings, std::filesystem::path dir);

  const Settings& settings() const { return settings_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Loads the dataset and writes split.txt.
  const LabeledDataset& ingest();
  std::size_t train_budget();
  std::size_t test_budget();

  /// Dynamic mode: trains and saves predictor.bin (+ predictor.cfg.txt).
  const PredictorModel* train_trigger();
  /// Poisons the training split for `target`; writes poisoned/,
  /// poisoned.txt and plans_train.txt.
  PoisonResult poison(int target);
  /// Reads back what poison(target) wrote.
  PoisonResult load_poisoned(int target);
  /// Trains the poisoned and the clean control classifiers.
  void train_attacker(int target, const PoisonResult& poisoned);
  /// Evaluates on the test split and writes report.txt, pr.csv and
  /// features.csv.
  EvalReport evaluate(int target);

  PoisonConfig poison_config(int target) const;
  TriggerSource trigger_source() const;

 private:
  Settings settings_;
  std::filesystem::path dir_;
  std::optional<LabeledDataset> dataset_;
  std::optional<PredictorModel> predictor_;
  std::optional<SoftmaxModel> attacker_;
  std::optional<SoftmaxModel> control_;
};

/// A pipeline stage failed; `stage` is the CLI sub-command name.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Runs `fn`, rethrowing any exception as StageFailure(stage).
template <typename F>
auto run_stage(const std::string& stage, F&& fn) {
  try {
    return fn();
  } catch (const StageFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw StageFailure(stage, e.what());
  }
}

/// Runs one target label end to end inside `dir`.
EvalReport run_single(const Settings& settings, int target, const std::filesystem::path& dir);

struct ExperimentOutcome {
  std::filesystem::path dir;
  std::vector<int> targets;
  std::vector<EvalReport> reports;
  std::map<std::string, std::string> summary;  // metric_mean / metric_std
};

/// Full pipeline for every sweep point and target label under
/// <out>/<config-hash>/; writes manifest.txt and summary.txt.
std::vector<ExperimentOutcome> run_experiment(const ExperimentConfig& cfg);

/// Labels for `random:n` (distinct, seeded) or the single literal label.
std::vector<int> resolve_targets(const std::string& target, int monitored_classes, std::uint64_t seed);

/// metric_mean and metric_std over the numeric keys the reports share.
std::map<std::string, std::string> summarize(const std::vector<EvalReport>& reports);

}  // namespace cwfd
