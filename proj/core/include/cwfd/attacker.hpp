#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "cwfd/trace.hpp"

namespace cwfd {

/// Traffic aggregation matrix shape.
struct TamConfig {
  std::size_t slots = 64;
  double max_time = 80.0;  // seconds covered by the slots

  void validate() const;
  std::size_t dimension() const { return 2 * slots; }
};

/// 2 x S packet counts, flattened as [outgoing row, incoming row].
struct TamFeatures {
  std::size_t slots = 0;
  Eigen::VectorXd values;

  double outgoing(std::size_t s) const { return values[static_cast<Eigen::Index>(s)]; }
  double incoming(std::size_t s) const { return values[static_cast<Eigen::Index>(slots + s)]; }
};

/// Counts packets per direction in S uniform time slots over [0, max_time];
/// later packets land in the last slot.
TamFeatures extract_tam(const Trace& x, const TamConfig& cfg = {});

/// One row per trace.
Eigen::MatrixXd extract_tam_matrix(const LabeledDataset& ds, const TamConfig& cfg, unsigned jobs = 1);

struct ClassifierHyper {
  double learning_rate = 0.5;
  std::size_t epochs = 500;
  double l2 = 1e-4;
};

/// Multinomial logistic regression on standardized features.
struct SoftmaxModel {
  Eigen::MatrixXd weights;  // C x D
  Eigen::VectorXd bias;     // C
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  ClassifierHyper hyper;

  std::size_t classes() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(weights.cols()); }

  Eigen::VectorXd standardize(const Eigen::VectorXd& raw) const;
  Eigen::MatrixXd standardize(const Eigen::MatrixXd& raw) const;

  /// Binary checkpoint: magic, C, D, weights, biases, mean, scale.
  void save(const std::filesystem::path& path) const;
  static SoftmaxModel load(const std::filesystem::path& path);

  friend bool operator==(const SoftmaxModel& a, const SoftmaxModel& b);
};

struct TrainedClassifier {
  SoftmaxModel model;
  double final_loss = 0.0;
};

/// Full-batch gradient descent on mean cross-entropy + (l2/2)|W|^2 from
/// zero weights. Standardization statistics come from `features`.
/// Throws when fewer than two classes are present.
TrainedClassifier train_classifier(const Eigen::MatrixXd& features, std::span<const int> labels,
                                   int class_count, const ClassifierHyper& hyper = {});

/// Objective and gradient on already-standardized features; exposed for
/// gradient checking.
double classifier_loss(const SoftmaxModel& model, const Eigen::MatrixXd& standardized,
                       std::span<const int> labels);
void classifier_gradient(const SoftmaxModel& model, const Eigen::MatrixXd& standardized,
                         std::span<const int> labels, Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b);

struct Prediction {
  int label = 0;
  Eigen::VectorXd probabilities;
};

/// Softmax over logits of the standardized raw feature vector; ties go to
/// the lowest class id.
Prediction predict(const SoftmaxModel& model, const Eigen::VectorXd& raw_features);
std::vector<Prediction> predict_all(const SoftmaxModel& model, const Eigen::MatrixXd& raw_features);

/// |tam(x_hat) - tam(x)|_2 on raw counts.
double feature_shift(const TamConfig& tam, const Trace& x, const Trace& x_hat);

struct GradientSimilarity {
  double cosine = 1.0;
  bool degenerate = false;  // a gradient was zero; cosine set to 1
};

/// Cosine between the per-sample loss gradients (weights and biases, no
/// regularizer) of (x_hat, y) and (x, y) at the model's parameters.
GradientSimilarity gradient_similarity(const SoftmaxModel& model, const TamConfig& tam,
                                       const Trace& x, const Trace& x_hat, int label);

/// CSV with the label in column 0 followed by the raw feature values.
std::string features_csv(const Eigen::MatrixXd& features, std::span<const int> labels);

}  // namespace cwfd
