#pragma once

// Independent reference computations shared by unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "cwfd/attacker.hpp"
#include "cwfd/injector.hpp"
#include "cwfd/seqdist.hpp"
#include "cwfd/trace.hpp"
#include "cwfd/trigger_dynamic.hpp"
#include "cwfd/util.hpp"

namespace cwfd::testing {

inline double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

/// Central differences of f over every predictor parameter.
template <typename F>
Eigen::VectorXd central_difference(PredictorModel model, F&& f, double h = 1e-5) {
  Eigen::VectorXd g(model.params().size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double keep = model.params()[i];
    model.params()[i] = keep + h;
    const double up = f(model);
    model.params()[i] = keep - h;
    const double down = f(model);
    model.params()[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Classifier gradient against central differences on the same loss.
inline double softmax_gradient_error(SoftmaxModel m, const Eigen::MatrixXd& z, const std::vector<int>& y,
                                     double h = 1e-5) {
  Eigen::MatrixXd gw;
  Eigen::VectorXd gb;
  classifier_gradient(m, z, y, gw, gb);
  const Eigen::Index nw = gw.size();
  Eigen::VectorXd analytic(nw + gb.size()), numeric(nw + gb.size());
  auto probe = [&](double& slot, Eigen::Index idx, double exact) {
    const double keep = slot;
    slot = keep + h;
    const double up = classifier_loss(m, z, y);
    slot = keep - h;
    const double down = classifier_loss(m, z, y);
    slot = keep;
    analytic[idx] = exact;
    numeric[idx] = (up - down) / (2 * h);
  };
  for (Eigen::Index k = 0; k < nw; ++k) probe(m.weights.data()[k], k, gw.data()[k]);
  for (Eigen::Index c = 0; c < gb.size(); ++c) probe(m.bias[c], nw + c, gb[c]);
  return relative_error(analytic, numeric);
}

/// Walks x_hat against the plan, skipping each burst at its location, and
/// checks that what remains is x.
inline bool original_recoverable(const Trace& x, const Trace& xh, const TriggerPlan& plan) {
  std::vector<PacketEvent> kept;
  std::size_t pos = 0, p = 0;
  for (std::size_t i = 0; i < xh.size();) {
    const std::size_t at = p < plan.size() ? std::min(plan.locations()[p], x.size()) : x.size() + 1;
    if (pos == at) {
      i += plan.bursts()[p];
      ++p;
      continue;
    }
    kept.push_back(xh[i]);
    ++i;
    ++pos;
  }
  return Trace(kept) == x;
}

/// Static objective from the injector and the full DP, truncating both
/// sides the way fast_lev does.
inline double oracle_objective(const Trace& x, const TriggerPlan& plan, const DistanceConfig& dist) {
  auto a = direction_sequence(x);
  auto b = direction_sequence(inject(x, plan));
  if (a.size() > dist.max_length) a.resize(dist.max_length);
  if (b.size() > dist.max_length) b.resize(dist.max_length);
  return levenshtein_full(a, b, dist);
}

/// Best oracle objective over every m-subset of [0, len) with an even split.
inline double brute_force_best(const Trace& x, std::size_t m, std::size_t total, const DistanceConfig& dist) {
  const auto split = equal_split(total, m);
  std::vector<bool> pick(x.size(), false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(m), true);
  double best = -1.0;
  do {
    std::vector<std::size_t> locs;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (pick[i]) locs.push_back(i);
    }
    best = std::max(best, oracle_objective(x, TriggerPlan(locs, split), dist));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace cwfd::testing
