#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cwfd/trace.hpp"

namespace cwfd {

/// Where and how many incoming dummy packets to insert.
///
/// `locations` is strictly increasing; `bursts[i]` dummies go immediately
/// before the original event at `locations[i]`. A location equal to the
/// trace length appends after the last event.
class TriggerPlan {
 public:
  TriggerPlan() = default;
  /// Throws std::invalid_argument on size mismatch or non-increasing
  /// locations.
  TriggerPlan(std::vector<std::size_t> locations, std::vector<std::size_t> bursts);

  std::size_t size() const { return locations_.size(); }
  bool empty() const { return locations_.empty(); }
  const std::vector<std::size_t>& locations() const { return locations_; }
  const std::vector<std::size_t>& bursts() const { return bursts_; }
  std::size_t total() const { return total_; }

  /// `k1:d1 k2:d2 ...`
  std::string to_string() const;
  static TriggerPlan parse(std::string_view text);

  friend bool operator==(const TriggerPlan&, const TriggerPlan&) = default;

 private:
  std::vector<std::size_t> locations_;
  std::vector<std::size_t> bursts_;
  std::size_t total_ = 0;
};

/// w(x, k, delta): inserts the planned dummy bursts without moving any real
/// packet in time. Dummies copy the timestamp of the event they precede (or
/// of the last event when appended). Locations beyond the trace length are
/// clamped to it.
Trace inject(const Trace& x, const TriggerPlan& plan);

/// Splits `total` into `m` bursts that differ by at most one, larger bursts
/// first.
std::vector<std::size_t> equal_split(std::size_t total, std::size_t m);

}  // namespace cwfd
