#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cwfd/attacker.hpp"
#include "cwfd/trace.hpp"

namespace cwfd {

/// Aggregate inserted/real packet ratio in percent. `after` must be derived
/// from `before` entry by entry (same names and labels).
double data_overhead(const LabeledDataset& before, const LabeledDataset& after);

/// Mean of the per-trace ratios, in percent.
double data_overhead_per_trace(const LabeledDataset& before, const LabeledDataset& after);

struct TimeOverhead {
  double percent = 0.0;
  bool degenerate = false;  // no load time to compare against
};

/// Sum of added load time over sum of undefended load time, in percent.
TimeOverhead time_overhead(const LabeledDataset& before, const LabeledDataset& after);

/// Percent of predictions equal to the true label. Throws on empty input.
double closed_world_accuracy(std::span<const Prediction> predictions, std::span<const int> labels);
double closed_world_accuracy(const SoftmaxModel& model, const Eigen::MatrixXd& features,
                             std::span<const int> labels);

/// Percent of predictions equal to `target` among entries whose true label
/// differs from it.
double target_rate(std::span<const Prediction> predictions, std::span<const int> labels, int target);

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct PrSweep {
  std::vector<PrPoint> points;  // thresholds in descending order
  double average_precision = 0.0;
};

/// Thresholds 0.9, 0.8, ..., 0.1.
std::vector<double> default_thresholds();

/// Open-world precision/recall sweep. A prediction counts as monitored when
/// its top probability reaches the threshold and its argmax is monitored; a
/// true positive also needs the right class. Precision with no monitored
/// predictions is taken as 1.
PrSweep pr_sweep(std::span<const Prediction> predictions, std::span<const int> labels,
                 const std::function<bool(int)>& is_monitored,
                 std::span<const double> thresholds = {});

/// Trapezoid area over the points ordered by recall, extended to recall 0
/// at the precision of the lowest-recall point.
double average_precision(std::span<const PrPoint> points);

/// Recall, true positives and flagged predictions non-decreasing as the
/// threshold drops.
bool pr_monotone(const PrSweep& sweep);

/// Precision non-increasing as the threshold drops. Not guaranteed: a lower
/// threshold can admit more true than false positives.
bool precision_non_increasing(const PrSweep& sweep);

double mean_average_precision(std::span<const double> aps);

/// Flat report; absent metrics are left out of the text.
struct EvalReport {
  double data_overhead = 0.0;
  double data_overhead_per_trace = 0.0;
  double time_overhead = 0.0;
  double clean_accuracy = 0.0;
  double control_clean_accuracy = 0.0;
  std::optional<double> red_pill_target_rate;
  std::optional<double> control_target_rate;
  std::optional<double> rr_target_rate;
  std::vector<PrPoint> pr_points;
  std::optional<double> map;
  std::map<std::string, std::string> extra;

  void validate() const;
  std::string to_text() const;
  std::string pr_csv() const;
};

}  // namespace cwfd
