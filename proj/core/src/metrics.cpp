#include "cwfd/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

void check_aligned(const LabeledDataset& before, const LabeledDataset& after) {
  if (before.size() != after.size()) throw std::invalid_argument("datasets are not aligned: sizes differ");
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto& a = before.entries[i];
    const auto& b = after.entries[i];
    if (a.name != b.name || a.label != b.label) {
      throw std::invalid_argument("datasets are not aligned at entry " + std::to_string(i));
    }
  }
}

double signed_growth(std::size_t before, std::size_t after) {
  return static_cast<double>(after) - static_cast<double>(before);
}

}  // namespace

double data_overhead(const LabeledDataset& before, const LabeledDataset& after) {
  check_aligned(before, after);
  double inserted = 0.0, real = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    inserted += signed_growth(before.entries[i].trace.size(), after.entries[i].trace.size());
    real += static_cast<double>(before.entries[i].trace.size());
  }
  return real > 0.0 ? inserted / real * 100.0 : 0.0;
}

double data_overhead_per_trace(const LabeledDataset& before, const LabeledDataset& after) {
  check_aligned(before, after);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    const auto real = before.entries[i].trace.size();
    if (real == 0) continue;
    sum += signed_growth(real, after.entries[i].trace.size()) / static_cast<double>(real);
    ++n;
  }
  return n ? sum / static_cast<double>(n) * 100.0 : 0.0;
}

TimeOverhead time_overhead(const LabeledDataset& before, const LabeledDataset& after) {
  check_aligned(before, after);
  double added = 0.0, base = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    added += after.entries[i].trace.duration() - before.entries[i].trace.duration();
    base += before.entries[i].trace.duration();
  }
  if (base <= 0.0) return {0.0, true};
  return {added / base * 100.0, false};
}

double closed_world_accuracy(std::span<const Prediction> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw std::invalid_argument("closed_world_accuracy: empty evaluation set");
  if (predictions.size() != labels.size()) throw std::invalid_argument("closed_world_accuracy: size mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i].label == labels[i];
  return static_cast<double>(correct) / static_cast<double>(labels.size()) * 100.0;
}

double closed_world_accuracy(const SoftmaxModel& model, const Eigen::MatrixXd& features,
                             std::span<const int> labels) {
  const auto preds = predict_all(model, features);
  return closed_world_accuracy(preds, labels);
}

double target_rate(std::span<const Prediction> predictions, std::span<const int> labels, int target) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("target_rate: size mismatch");
  std::size_t hits = 0, total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == target) continue;
    ++total;
    hits += predictions[i].label == target;
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) * 100.0 : 0.0;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  for (int i = 9; i >= 1; --i) t.push_back(i / 10.0);
  return t;
}

PrSweep pr_sweep(std::span<const Prediction> predictions, std::span<const int> labels,
                 const std::function<bool(int)>& is_monitored, std::span<const double> thresholds) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("pr_sweep: size mismatch");
  std::vector<double> ts(thresholds.begin(), thresholds.end());
  if (ts.empty()) ts = default_thresholds();
  std::sort(ts.begin(), ts.end(), std::greater<>());

  std::size_t monitored = 0;
  for (int y : labels) monitored += is_monitored(y);
  if (monitored == 0) throw std::invalid_argument("pr_sweep: no monitored entries");

  PrSweep sweep;
  for (double t : ts) {
    PrPoint p;
    p.threshold = t;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto& pred = predictions[i];
      const bool flagged = is_monitored(pred.label) && pred.probabilities.maxCoeff() >= t;
      const bool tp = flagged && pred.label == labels[i];
      if (tp) {
        ++p.tp;
      } else if (flagged) {
        ++p.fp;
      }
      if (is_monitored(labels[i]) && !tp) ++p.fn;
    }
    p.precision = p.tp + p.fp ? static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fp) : 1.0;
    p.recall = static_cast<double>(p.tp) / static_cast<double>(p.tp + p.fn);
    sweep.points.push_back(p);
  }
  sweep.average_precision = average_precision(sweep.points);
  return sweep;
}

double average_precision(std::span<const PrPoint> points) {
  if (points.empty()) return 0.0;
  std::vector<PrPoint> sorted(points.begin(), points.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  double area = sorted.front().recall * sorted.front().precision;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    area += (sorted[i].recall - sorted[i - 1].recall) * 0.5 * (sorted[i].precision + sorted[i - 1].precision);
  }
  return area;
}

bool pr_monotone(const PrSweep& sweep) {
  for (std::size_t i = 1; i < sweep.points.size(); ++i) {
    const auto& hi = sweep.points[i - 1];  // higher threshold
    const auto& lo = sweep.points[i];
    if (lo.recall < hi.recall || lo.tp < hi.tp || lo.tp + lo.fp < hi.tp + hi.fp) return false;
  }
  return true;
}

bool precision_non_increasing(const PrSweep& sweep) {
  for (std::size_t i = 1; i < sweep.points.size(); ++i) {
    if (sweep.points[i].precision > sweep.points[i - 1].precision) return false;
  }
  return true;
}

double mean_average_precision(std::span<const double> aps) {
  if (aps.empty()) return 0.0;
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

void EvalReport::validate() const {
  auto pct = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 100.0)) throw std::logic_error(std::string("EvalReport: ") + name + " outside [0, 100]");
  };
  pct(clean_accuracy, "clean_accuracy");
  pct(control_clean_accuracy, "control_clean_accuracy");
  if (red_pill_target_rate) pct(*red_pill_target_rate, "red_pill_target_rate");
  if (control_target_rate) pct(*control_target_rate, "control_target_rate");
  if (rr_target_rate) pct(*rr_target_rate, "rr_target_rate");
  if (map && !(*map >= 0.0 && *map <= 1.0)) throw std::logic_error("EvalReport: mAP outside [0, 1]");
  for (const auto& p : pr_points) {
    if (!(p.precision >= 0.0 && p.precision <= 1.0 && p.recall >= 0.0 && p.recall <= 1.0)) {
      throw std::logic_error("EvalReport: PR point outside [0, 1]");
    }
  }
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << "data_overhead=" << format_double(data_overhead) << '\n';
  os << "data_overhead_per_trace=" << format_double(data_overhead_per_trace) << '\n';
  os << "time_overhead=" << format_double(time_overhead) << '\n';
  os << "clean_accuracy=" << format_double(clean_accuracy) << '\n';
  os << "control_clean_accuracy=" << format_double(control_clean_accuracy) << '\n';
  if (red_pill_target_rate) os << "red_pill_target_rate=" << format_double(*red_pill_target_rate) << '\n';
  if (control_target_rate) os << "control_target_rate=" << format_double(*control_target_rate) << '\n';
  if (rr_target_rate) os << "rr_target_rate=" << format_double(*rr_target_rate) << '\n';
  if (map) os << "map=" << format_double(*map) << '\n';
  for (const auto& [k, v] : extra) os << k << '=' << v << '\n';
  return os.str();
}

std::string EvalReport::pr_csv() const {
  std::string out = "threshold,precision,recall,tp,fp,fn\n";
  for (const auto& p : pr_points) {
    out += format_double(p.threshold) + ',' + format_double(p.precision) + ',' + format_double(p.recall) + ',' +
           std::to_string(p.tp) + ',' + std::to_string(p.fp) + ',' + std::to_string(p.fn) + '\n';
  }
  return out;
}

}  // namespace cwfd
