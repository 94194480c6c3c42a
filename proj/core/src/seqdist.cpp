#include "cwfd/seqdist.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cwfd {
namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DistanceConfig::validate() const {
  if (!(insertion > 0.0) || !(deletion > 0.0) || !(substitution > 0.0)) {
    throw std::invalid_argument("DistanceConfig: edit costs must be positive");
  }
}

double levenshtein_full(std::span<const Direction> a, std::span<const Direction> b,
                        const DistanceConfig& cfg) {
  cfg.validate();
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = static_cast<double>(j) * cfg.insertion;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<double>(i) * cfg.deletion;
    for (std::size_t j = 1; j <= m; ++j) {
      const double sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0.0 : cfg.substitution);
      cur[j] = std::min({sub, prev[j] + cfg.deletion, cur[j - 1] + cfg.insertion});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double fast_lev(std::span<const Direction> a, std::span<const Direction> b,
                const DistanceConfig& cfg) {
  cfg.validate();
  a = a.first(std::min(a.size(), cfg.max_length));
  b = b.first(std::min(b.size(), cfg.max_length));
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const std::size_t w = cfg.band_width + (n > m ? n - m : m - n);

  // Rows are full width, but only the band [lo, hi] of each row is written;
  // the cell just past the previous row's band is reset to infinity so
  // stale values are never read.
  std::vector<double> prev(m + 2, kInf), cur(m + 2, kInf);
  const std::size_t first_hi = std::min(m, w);
  for (std::size_t j = 0; j <= first_hi; ++j) prev[j] = static_cast<double>(j) * cfg.insertion;

  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t lo = i > w ? i - w : 0;
    const std::size_t hi = std::min(m, i + w);
    if (lo > hi) return kInf;
    const Direction ai = a[i - 1];
    double left = kInf;
    std::size_t j = lo;
    if (j == 0) {
      cur[0] = static_cast<double>(i) * cfg.deletion;
      left = cur[0];
      j = 1;
    }
    for (; j <= hi; ++j) {
      const double sub = prev[j - 1] + (ai == b[j - 1] ? 0.0 : cfg.substitution);
      const double del = prev[j] + cfg.deletion;
      const double ins = left + cfg.insertion;
      left = std::min({sub, del, ins});
      cur[j] = left;
    }
    // Invalidate the cells of the previous row that fall outside this band.
    if (lo > 0) cur[lo - 1] = kInf;
    cur[hi + 1] = kInf;
    std::swap(prev, cur);
  }
  return prev[m];
}

double fast_lev(const Trace& a, const Trace& b, const DistanceConfig& cfg) {
  const auto da = direction_sequence(a);
  const auto db = direction_sequence(b);
  return fast_lev(da, db, cfg);
}

}  // namespace cwfd
