#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cwfd/injector.hpp"
#include "cwfd/seqdist.hpp"
#include "cwfd/trace.hpp"

namespace cwfd {

struct StaticOptConfig {
  std::size_t pool_size = 20;
  std::size_t bursts = 7;  // m
  std::size_t total = 0;   // insertion budget, split evenly across bursts
  std::size_t num_iterations = 3;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct StaticOptResult {
  TriggerPlan plan;
  double score = 0.0;
  // Best objective after each greedy addition.
  std::vector<double> trajectory;
  std::vector<std::string> warnings;
};

/// Objective being maximized: D_F between the clean and injected direction
/// sequences.
double static_objective(std::span<const Direction> clean, const TriggerPlan& plan,
                        const DistanceConfig& dist);

/// Greedy location search with equal bursts.
///
/// A candidate pool of `pool_size` distinct indices is drawn from [0, L).
/// Locations are added one at a time, each time taking the pool index that
/// maximizes the objective with earlier picks held fixed (lowest index wins
/// ties). Later passes try single swaps between chosen and unchosen pool
/// indices and stop as soon as a pass leaves the incumbent unchanged.
StaticOptResult optimize_static(const Trace& x, const StaticOptConfig& cfg,
                                const DistanceConfig& dist);

/// Same search over an explicit candidate pool; used by tests and by
/// optimize_static after sampling.
StaticOptResult optimize_static_with_pool(const Trace& x, std::vector<std::size_t> pool,
                                          const StaticOptConfig& cfg,
                                          const DistanceConfig& dist);

}  // namespace cwfd
