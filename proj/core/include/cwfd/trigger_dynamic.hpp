#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cwfd/injector.hpp"
#include "cwfd/seqdist.hpp"
#include "cwfd/trace.hpp"
#include "cwfd/util.hpp"

namespace cwfd {

/// Rounded, clamped Gaussian over burst lengths.
struct BurstDistribution {
  double mean = 0.0;
  double spread = 1.0;
};

/// Recurrent burst-length predictor.
///
/// One LSTM cell reads the direction stream (+1/-1) one packet at a time.
/// The hidden state after the last packet of a prefix feeds two linear
/// heads:
///
///   mean   = output_scale * softplus(w_mean . h + b_mean)
///   spread = output_scale * (spread_floor + softplus(w_spread . h + b_spread))
///
/// Parameters live in one flat vector laid out as
/// [W_in (4H), U (4H x H, row-major), b (4H), w_mean (H), b_mean,
///  w_spread (H), b_spread], gate order input, forget, cell, output.
class PredictorModel {
 public:
  PredictorModel() = default;

  /// All parameters zero.
  static PredictorModel zeros(std::size_t hidden, double output_scale = 1.0,
                              double burst_cap = 20000.0);
  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero head biases.
  static PredictorModel random(std::size_t hidden, std::uint64_t seed, double output_scale,
                               double burst_cap);

  static std::size_t parameter_count(std::size_t hidden);

  std::size_t hidden() const { return hidden_; }
  double output_scale() const { return output_scale_; }
  double burst_cap() const { return burst_cap_; }
  double spread_floor() const { return spread_floor_; }
  void set_spread_floor(double v) { spread_floor_ = v; }
  /// Prefixes longer than this are cut to their most recent packets.
  std::size_t max_prefix() const { return max_prefix_; }
  void set_max_prefix(std::size_t v) { max_prefix_ = v; }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }
  bool finite() const { return params_.allFinite(); }

  /// Distribution after reading the whole prefix. Throws on empty prefix.
  BurstDistribution distribution(std::span<const Direction> prefix) const;

  /// Distributions for the prefixes seq[:ends[i]] from one pass over seq.
  /// `ends` must be non-decreasing and each in [1, seq.size()].
  std::vector<BurstDistribution> distributions_at(std::span<const Direction> seq,
                                                  std::span<const std::size_t> ends) const;

  /// Gradient w.r.t. params of sum_i [ coef_mean[i] * mean_i + coef_spread[i] * spread_i ]
  /// where mean_i / spread_i are the head outputs at seq[:ends[i]].
  Eigen::VectorXd head_gradient(std::span<const Direction> seq, std::span<const std::size_t> ends,
                                std::span<const double> coef_mean,
                                std::span<const double> coef_spread) const;

  /// Binary checkpoint: magic, H, scale, cap, floor, prefix limit, parameter
  /// array.
  void save(const std::filesystem::path& path) const;
  static PredictorModel load(const std::filesystem::path& path);

  friend bool operator==(const PredictorModel& a, const PredictorModel& b) {
    return a.hidden_ == b.hidden_ && a.output_scale_ == b.output_scale_ &&
           a.burst_cap_ == b.burst_cap_ && a.spread_floor_ == b.spread_floor_ &&
           a.max_prefix_ == b.max_prefix_ &&
           a.params_.size() == b.params_.size() && a.params_ == b.params_;
  }

 private:
  struct Pass;
  Pass run(std::span<const Direction> seq) const;
  void backward(const Pass& pass, std::span<const std::size_t> ends,
                std::span<const double> coef_mean, std::span<const double> coef_spread,
                Eigen::VectorXd& grad) const;
  BurstDistribution head(const Eigen::VectorXd& h) const;

  std::size_t hidden_ = 0;
  double output_scale_ = 1.0;
  double burst_cap_ = 20000.0;
  double spread_floor_ = 0.05;
  std::size_t max_prefix_ = 2000;
  Eigen::VectorXd params_;
};

enum class BurstMode { kMode, kSample };

/// Rounds a raw burst draw to an integer in [0, cap].
std::size_t quantize_burst(double raw, double cap);

/// h(x[:k]). kMode returns the rounded clamped mean; kSample draws from the
/// distribution using `rng` (required in that mode).
std::size_t predict_burst(const PredictorModel& model, std::span<const Direction> prefix,
                          BurstMode mode = BurstMode::kMode, Rng* rng = nullptr);

/// Log-density of a raw (unclamped) draw under the prefix's distribution.
double burst_log_prob(const PredictorModel& model, std::span<const Direction> prefix, double raw);
Eigen::VectorXd burst_log_prob_gradient(const PredictorModel& model,
                                        std::span<const Direction> prefix, double raw);

/// -D_F(x, x_hat).
double sequence_loss(const Trace& x, const Trace& x_hat, const DistanceConfig& dist);
/// (sum(bursts) - cap)^2.
double constraint_loss(std::span<const double> bursts, double cap);
/// d constraint_loss / d burst_i, identical for every i.
std::vector<double> constraint_loss_gradient(std::span<const double> bursts, double cap);

/// Constraint loss evaluated at the predicted means of seq[:ends[i]], and
/// its exact gradient w.r.t. the model parameters.
double mean_constraint_loss(const PredictorModel& model, std::span<const Direction> seq,
                            std::span<const std::size_t> ends, double cap);
Eigen::VectorXd mean_constraint_gradient(const PredictorModel& model,
                                         std::span<const Direction> seq,
                                         std::span<const std::size_t> ends, double cap);

struct DynTrainConfig {
  double lambda = 1.0;
  std::size_t delta_max = 20000;
  std::size_t bursts = 7;
  double learning_rate = 4e-6;
  std::size_t batch_size = 1024;
  std::size_t epochs = 1;
  std::uint64_t rng_seed = 0;
  double baseline_decay = 0.9;
  std::size_t hidden = 64;
  std::size_t max_prefix = 2000;
  double spread_floor = 0.05;

  void validate() const;
  /// key=value lines, one per field.
  std::string to_text() const;
};

struct DynTrainResult {
  PredictorModel model;
  std::vector<double> batch_mean_reward;
  std::vector<double> batch_mean_total;  // mean inserted packets per trace
  std::vector<std::string> warnings;
};

/// Score-function training of the predictor.
///
/// Per trace: draw `bursts` insertion indices, sample a burst at each prefix,
/// inject, and score R = D_F(x, x_hat) - lambda * (sum - delta_max)^2. The
/// D_F part is credited through the log-density of the sampled bursts
/// against an exponential-moving-average baseline; the constraint part
/// uses its exact gradient through the predicted means. Parameters are
/// updated once per batch with Adam.
DynTrainResult train_dynamic(const LabeledDataset& dataset, const DynTrainConfig& cfg,
                             const DistanceConfig& dist, const PredictorModel* initial = nullptr);

/// Half-open index range.
struct IndexRange {
  std::size_t begin = 50;
  std::size_t end = 1500;
};

/// Returns x[:k] for the trace being defended.
using PrefixProvider = std::function<std::vector<Direction>(std::size_t k)>;

/// Draws `m` distinct insertion indices from `region` (indices below 1 are
/// excluded since a prefix must be non-empty), sorts them, and asks the
/// predictor for each burst in mode kMode.
TriggerPlan infer_plan(const PredictorModel& model, const PrefixProvider& prefix, std::size_t m,
                       IndexRange region, std::uint64_t seed);

/// Offline variant over a full trace; the region is first clipped to the
/// trace. Equal to the provider form for the same seed.
TriggerPlan infer_plan(const PredictorModel& model, const Trace& x, std::size_t m,
                       IndexRange region, std::uint64_t seed);

/// Region actually used for a trace of length `len`: clipped to [1, len),
/// and widened to start at 1 when it would hold fewer than m indices.
IndexRange effective_region(IndexRange region, std::size_t len, std::size_t m);

}  // namespace cwfd
