#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cwfd/injector.hpp"
#include "cwfd/seqdist.hpp"
#include "cwfd/trace.hpp"
#include "cwfd/trigger_dynamic.hpp"
#include "cwfd/trigger_static.hpp"

namespace cwfd {

enum class TriggerMode { kStatic, kDynamic };

struct PoisonConfig {
  int target_label = 0;
  double poison_rate = 0.01;
  TriggerMode mode = TriggerMode::kStatic;
  std::size_t train_budget = 20000;  // static insertion total at poisoning time
  std::size_t test_budget = 20000;   // static insertion total for the red pill
  std::size_t bursts = 7;
  std::uint64_t rng_seed = 0;

  void validate(int class_count) const;
};

/// What the pipeline needs to build a trigger for one trace.
struct TriggerSource {
  StaticOptConfig static_opt;  // total and seed are overwritten per trace
  DistanceConfig distance;
  const PredictorModel* predictor = nullptr;  // required in dynamic mode
  IndexRange region;
  unsigned jobs = 1;
};

/// Trigger plan for entry `index` of a dataset. Seeds derive from
/// (rng_seed, stream, index) so results do not depend on processing order.
TriggerPlan make_trigger(const Trace& x, std::size_t index, std::size_t budget, std::uint64_t stream,
                         const PoisonConfig& cfg, const TriggerSource& source);

struct PoisonResult {
  LabeledDataset dataset;
  std::vector<std::size_t> poisoned_indices;  // ascending
  std::vector<TriggerPlan> plans;             // parallel to poisoned_indices
};

/// Label-consistent poisoning: ceil(rate * N_target) target-class traces,
/// chosen uniformly, receive a trigger. Labels never change.
PoisonResult poison_trainset(const LabeledDataset& ds, const PoisonConfig& cfg,
                             const TriggerSource& source);

struct RedPillResult {
  LabeledDataset dataset;
  std::vector<TriggerPlan> plans;  // empty plan for target-class entries
};

/// Defense on: every non-target trace receives a trigger.
RedPillResult apply_red_pill(const LabeledDataset& ds, const PoisonConfig& cfg,
                             const TriggerSource& source);

/// Defense off: returns the dataset unchanged.
LabeledDataset apply_blue_pill(const LabeledDataset& ds);

/// Attacker countermeasure: from m random positions per trace, delete the
/// next equal_split(total, m) incoming packets, scanning forward and wrapping
/// to the start of the trace. Outgoing packets are never removed.
LabeledDataset random_removal(const LabeledDataset& ds, std::size_t total, std::size_t m,
                              std::uint64_t rng_seed);

Trace remove_incoming(const Trace& x, std::size_t total, std::size_t m, std::uint64_t seed);

/// Saves the dataset under `dir` and writes `manifest` listing the names of
/// poisoned entries, one per line.
void save_poisoned(const LabeledDataset& ds, const std::filesystem::path& dir,
                   const std::filesystem::path& manifest);

}  // namespace cwfd
