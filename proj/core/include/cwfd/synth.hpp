#pragma once

#include <cstddef>
#include <cstdint>

#include "cwfd/trace.hpp"

namespace cwfd {

/// Synthetic page-load corpus. Every class owns a fixed burst profile
/// (outgoing request count, incoming response count, idle gap before the
/// burst); instances jitter the counts and gaps, occasionally drop a burst,
/// and sprinkle stray packets.
struct SynthConfig {
  int classes = 10;
  std::size_t per_class = 100;
  std::size_t unmonitored = 0;  // open-world instances, each with its own profile
  std::size_t min_bursts = 8;
  std::size_t max_bursts = 14;
  double min_gap = 0.3;  // seconds of idle time before a burst
  double max_gap = 5.0;
  double count_jitter = 0.2;  // relative
  double gap_jitter = 0.25;   // relative
  double drop_probability = 0.05;
  std::uint64_t seed = 1;
};

/// Entries are named `<label>-<instance>` (unmonitored: `<instance>`) and
/// sorted by name, matching load_dataset's order.
LabeledDataset make_synthetic_corpus(const SynthConfig& cfg);

}  // namespace cwfd
