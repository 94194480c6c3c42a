#include "cwfd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

struct BurstSpec {
  double outgoing;
  double incoming;
  double gap;  // seconds of idle time before the burst
};

std::vector<BurstSpec> make_profile(Rng& rng, const SynthConfig& cfg) {
  const std::size_t n = cfg.min_bursts + rng.index(cfg.max_bursts - cfg.min_bursts + 1);
  std::vector<BurstSpec> profile(n);
  for (auto& b : profile) {
    b.outgoing = rng.uniform(1.0, 5.0);
    b.incoming = rng.uniform(4.0, 60.0);
    b.gap = rng.uniform(cfg.min_gap, cfg.max_gap);
  }
  return profile;
}

std::size_t jitter_count(Rng& rng, double base, double rel) {
  const double v = base * (1.0 + rel * (2.0 * rng.uniform() - 1.0));
  return static_cast<std::size_t>(std::max(0.0, std::round(v)));
}

Trace render(Rng& rng, const std::vector<BurstSpec>& profile, const SynthConfig& cfg) {
  std::vector<PacketEvent> events;
  double t = 0.0;
  auto emit = [&](Direction d) {
    events.push_back({t, d});
    t += rng.uniform(0.001, 0.01);
  };
  emit(kOutgoing);  // connection start
  for (const auto& b : profile) {
    if (rng.uniform() < cfg.drop_probability) continue;
    t += b.gap * (1.0 + cfg.gap_jitter * (2.0 * rng.uniform() - 1.0));
    const auto out = std::max<std::size_t>(1, jitter_count(rng, b.outgoing, cfg.count_jitter));
    const auto in = jitter_count(rng, b.incoming, cfg.count_jitter);
    for (std::size_t k = 0; k < out; ++k) emit(kOutgoing);
    for (std::size_t k = 0; k < in; ++k) {
      // Stray acknowledgements inside long responses.
      if (rng.uniform() < 0.05) emit(kOutgoing);
      emit(kIncoming);
    }
  }
  return Trace(std::move(events));
}

}  // namespace

LabeledDataset make_synthetic_corpus(const SynthConfig& cfg) {
  if (cfg.classes < 1) throw std::invalid_argument("SynthConfig: classes must be >= 1");
  if (!(cfg.min_gap >= 0.0 && cfg.max_gap >= cfg.min_gap)) throw std::invalid_argument("SynthConfig: bad gap range");
  if (cfg.min_bursts < 1 || cfg.max_bursts < cfg.min_bursts) {
    throw std::invalid_argument("SynthConfig: bad burst range");
  }
  LabeledDataset ds;
  ds.class_count = cfg.classes + (cfg.unmonitored > 0 ? 1 : 0);
  for (int c = 0; c < cfg.classes; ++c) {
    Rng profile_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(c)));
    const auto profile = make_profile(profile_rng, cfg);
    for (std::size_t i = 0; i < cfg.per_class; ++i) {
      Rng rng(derive_seed(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(c)), i));
      ds.entries.push_back({std::to_string(c) + "-" + std::to_string(i), render(rng, profile, cfg), c, false});
    }
  }
  for (std::size_t i = 0; i < cfg.unmonitored; ++i) {
    Rng rng(derive_seed(derive_seed(cfg.seed, 0xabcdef), i));
    const auto profile = make_profile(rng, cfg);
    ds.entries.push_back({std::to_string(i), render(rng, profile, cfg), ds.class_count - 1, false});
  }
  std::sort(ds.entries.begin(), ds.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.name < b.name; });
  return ds;
}

}  // namespace cwfd
