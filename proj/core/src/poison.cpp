#include "cwfd/poison.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {
constexpr std::uint64_t kPoisonStream = 1;
constexpr std::uint64_t kRedPillStream = 2;
}  // namespace

void PoisonConfig::validate(int class_count) const {
  if (!(poison_rate > 0.0 && poison_rate <= 1.0)) {
    throw std::invalid_argument("PoisonConfig: poison_rate must be in (0, 1]");
  }
  if (target_label < 0 || target_label >= class_count) {
    throw std::invalid_argument("PoisonConfig: target_label " + std::to_string(target_label) +
                                " outside [0, " + std::to_string(class_count) + ")");
  }
  if (bursts < 1) throw std::invalid_argument("PoisonConfig: bursts must be >= 1");
}

TriggerPlan make_trigger(const Trace& x, std::size_t index, std::size_t budget, std::uint64_t stream,
                         const PoisonConfig& cfg, const TriggerSource& source) {
  const std::uint64_t seed = derive_seed(derive_seed(cfg.rng_seed, stream), index);
  if (cfg.mode == TriggerMode::kStatic) {
    StaticOptConfig opt = source.static_opt;
    opt.total = budget;
    opt.bursts = cfg.bursts;
    opt.pool_size = std::max(opt.pool_size, opt.bursts);
    opt.rng_seed = seed;
    return optimize_static(x, opt, source.distance).plan;
  }
  if (!source.predictor) throw std::invalid_argument("dynamic trigger mode needs a predictor model");
  return infer_plan(*source.predictor, x, cfg.bursts, source.region, seed);
}

PoisonResult poison_trainset(const LabeledDataset& ds, const PoisonConfig& cfg, const TriggerSource& source) {
  cfg.validate(ds.class_count);
  std::vector<std::size_t> target;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.entries[i].label == cfg.target_label) target.push_back(i);
  }
  if (target.empty()) {
    throw std::invalid_argument("poison_trainset: target class " + std::to_string(cfg.target_label) +
                                " has no traces");
  }
  // Rounded away from floating noise before taking the ceiling.
  const double want = cfg.poison_rate * static_cast<double>(target.size());
  const auto count = std::min(target.size(),
                              static_cast<std::size_t>(std::ceil(want - 1e-9 * static_cast<double>(target.size()))));
  Rng rng(derive_seed(cfg.rng_seed, 0));
  auto picks = rng.sample_without_replacement(target.size(), std::max<std::size_t>(count, 1));

  PoisonResult out;
  out.dataset = ds;
  for (auto p : picks) out.poisoned_indices.push_back(target[p]);
  std::sort(out.poisoned_indices.begin(), out.poisoned_indices.end());
  out.plans.resize(out.poisoned_indices.size());
  parallel_for(out.poisoned_indices.size(), source.jobs, [&](std::size_t n) {
    const std::size_t idx = out.poisoned_indices[n];
    auto& entry = out.dataset.entries[idx];
    out.plans[n] = make_trigger(entry.trace, idx, cfg.train_budget, kPoisonStream, cfg, source);
    entry.trace = inject(entry.trace, out.plans[n]);
    entry.poisoned = true;
  });
  return out;
}

RedPillResult apply_red_pill(const LabeledDataset& ds, const PoisonConfig& cfg, const TriggerSource& source) {
  RedPillResult out;
  out.dataset = ds;
  out.plans.resize(ds.size());
  parallel_for(ds.size(), source.jobs, [&](std::size_t i) {
    auto& entry = out.dataset.entries[i];
    if (entry.label == cfg.target_label) return;
    out.plans[i] = make_trigger(entry.trace, i, cfg.test_budget, kRedPillStream, cfg, source);
    entry.trace = inject(entry.trace, out.plans[i]);
  });
  return out;
}

LabeledDataset apply_blue_pill(const LabeledDataset& ds) { return ds; }

Trace remove_incoming(const Trace& x, std::size_t total, std::size_t m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("random_removal: m must be >= 1");
  if (total == 0 || x.empty()) return x;
  const auto& events = x.events();
  const std::size_t len = events.size();
  std::vector<bool> removed(len, false);
  std::size_t remaining = x.count(kIncoming);

  Rng rng(seed);
  const auto shares = equal_split(total, m);
  for (std::size_t b = 0; b < m && remaining > 0; ++b) {
    std::size_t pos = rng.index(len);
    std::size_t left = shares[b];
    for (std::size_t step = 0; step < len && left > 0 && remaining > 0; ++step) {
      const std::size_t i = (pos + step) % len;
      if (!removed[i] && events[i].direction == kIncoming) {
        removed[i] = true;
        --left;
        --remaining;
      }
    }
  }
  std::vector<PacketEvent> kept;
  kept.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    if (!removed[i]) kept.push_back(events[i]);
  }
  return Trace(std::move(kept));
}

LabeledDataset random_removal(const LabeledDataset& ds, std::size_t total, std::size_t m, std::uint64_t rng_seed) {
  if (m < 1) throw std::invalid_argument("random_removal: m must be >= 1");
  LabeledDataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& e = out.entries[i];
    e.trace = remove_incoming(e.trace, total, m, derive_seed(rng_seed, i));
  }
  return out;
}

void save_poisoned(const LabeledDataset& ds, const std::filesystem::path& dir,
                   const std::filesystem::path& manifest) {
  save_dataset(ds, dir);
  std::string list;
  for (const auto& e : ds.entries) {
    if (e.poisoned) list += e.name + '\n';
  }
  write_file_atomic(manifest, list);
}

}  // namespace cwfd
