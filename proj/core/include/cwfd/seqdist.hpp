#pragma once

#include <cstddef>
#include <span>

#include "cwfd/trace.hpp"

namespace cwfd {

/// Weighted edit distance over direction sequences.
struct DistanceConfig {
  std::size_t band_width = 512;
  double insertion = 1.0;
  double deletion = 1.0;
  double substitution = 1.0;
  // fast_lev cuts both inputs to this many symbols first.
  std::size_t max_length = 10000;

  /// Throws std::invalid_argument unless all costs are positive.
  void validate() const;
};

/// Exact weighted Levenshtein distance (full dynamic program). Insertions
/// and deletions are counted when transforming `a` into `b`.
double levenshtein_full(std::span<const Direction> a, std::span<const Direction> b,
                        const DistanceConfig& cfg = {});

/// Banded Levenshtein: cells with |i - j| > band_width + ||a| - |b|| are
/// unreachable. Never smaller than levenshtein_full, and equal to it
/// whenever band_width covers the optimal path.
double fast_lev(std::span<const Direction> a, std::span<const Direction> b,
                const DistanceConfig& cfg = {});

double fast_lev(const Trace& a, const Trace& b, const DistanceConfig& cfg = {});

}  // namespace cwfd
