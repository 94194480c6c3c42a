#include "cwfd/trigger_static.hpp"

#include <algorithm>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

std::vector<Direction> inject_directions(std::span<const Direction> clean, const TriggerPlan& plan) {
  std::vector<Direction> out;
  out.reserve(clean.size() + plan.total());
  std::size_t next = 0;
  for (std::size_t m = 0; m < plan.size(); ++m) {
    const std::size_t k = std::min(plan.locations()[m], clean.size());
    out.insert(out.end(), clean.begin() + static_cast<std::ptrdiff_t>(next),
               clean.begin() + static_cast<std::ptrdiff_t>(k));
    next = k;
    out.insert(out.end(), plan.bursts()[m], kIncoming);
  }
  out.insert(out.end(), clean.begin() + static_cast<std::ptrdiff_t>(next), clean.end());
  return out;
}

// Bursts are assigned in ascending location order from the fixed split.
TriggerPlan make_plan(std::vector<std::size_t> locations, const std::vector<std::size_t>& split) {
  std::sort(locations.begin(), locations.end());
  std::vector<std::size_t> bursts(split.begin(), split.begin() + static_cast<std::ptrdiff_t>(locations.size()));
  return TriggerPlan(std::move(locations), std::move(bursts));
}

}  // namespace

void StaticOptConfig::validate() const {
  if (bursts < 1) throw std::invalid_argument("StaticOptConfig: bursts must be >= 1");
  if (pool_size < bursts) throw std::invalid_argument("StaticOptConfig: pool_size must be >= bursts");
}

double static_objective(std::span<const Direction> clean, const TriggerPlan& plan,
                        const DistanceConfig& dist) {
  const auto injected = inject_directions(clean, plan);
  return fast_lev(clean, injected, dist);
}

StaticOptResult optimize_static_with_pool(const Trace& x, std::vector<std::size_t> pool,
                                          const StaticOptConfig& cfg, const DistanceConfig& dist) {
  if (x.empty()) throw std::invalid_argument("optimize_static: trace is empty");
  if (cfg.bursts < 1) throw std::invalid_argument("optimize_static: bursts must be >= 1");
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::erase_if(pool, [&](std::size_t k) { return k >= x.size(); });
  if (pool.empty()) throw std::invalid_argument("optimize_static: empty candidate pool");

  StaticOptResult result;
  std::size_t m = cfg.bursts;
  if (pool.size() < m) {
    result.warnings.push_back("candidate pool has " + std::to_string(pool.size()) +
                              " indices; reducing bursts from " + std::to_string(m));
    m = pool.size();
  }
  const auto split = equal_split(cfg.total, m);
  const auto clean = direction_sequence(x);
  auto score_of = [&](const std::vector<std::size_t>& locs) {
    return static_objective(clean, make_plan(locs, split), dist);
  };

  // Greedy construction.
  std::vector<std::size_t> chosen;
  std::vector<bool> used(pool.size(), false);
  double best = 0.0;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t pick = pool.size();
    double pick_score = -1.0;
    for (std::size_t c = 0; c < pool.size(); ++c) {
      if (used[c]) continue;
      auto trial = chosen;
      trial.push_back(pool[c]);
      const double s = score_of(trial);
      if (s > pick_score) {
        pick_score = s;
        pick = c;
      }
    }
    used[pick] = true;
    chosen.push_back(pool[pick]);
    best = std::max(best, pick_score);
    result.trajectory.push_back(best);
  }
  best = score_of(chosen);

  // Swap passes; each runs only if the previous one moved the incumbent.
  for (std::size_t pass = 1; pass < cfg.num_iterations; ++pass) {
    bool changed = false;
    for (std::size_t slot = 0; slot < chosen.size(); ++slot) {
      for (std::size_t c = 0; c < pool.size(); ++c) {
        if (used[c]) continue;
        auto trial = chosen;
        trial[slot] = pool[c];
        const double s = score_of(trial);
        if (s > best) {
          const auto old = std::find(pool.begin(), pool.end(), chosen[slot]) - pool.begin();
          used[static_cast<std::size_t>(old)] = false;
          used[c] = true;
          chosen = std::move(trial);
          best = s;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }

  result.plan = make_plan(chosen, split);
  result.score = best;
  return result;
}

StaticOptResult optimize_static(const Trace& x, const StaticOptConfig& cfg, const DistanceConfig& dist) {
  if (x.empty()) throw std::invalid_argument("optimize_static: trace is empty");
  cfg.validate();
  Rng rng(cfg.rng_seed);
  auto pool = rng.sample_without_replacement(x.size(), cfg.pool_size);
  return optimize_static_with_pool(x, std::move(pool), cfg, dist);
}

}  // namespace cwfd
