#include "cwfd/attacker.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian");
constexpr char kMagic[8] = {'C', 'W', 'F', 'D', 'S', 'M', 'A', 'X'};

template <typename A, typename B>
bool same(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

// Row-wise softmax of logits, in place.
void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - mx).exp();
    logits.row(r) /= logits.row(r).sum();
  }
}

}  // namespace

void TamConfig::validate() const {
  if (slots < 1) throw std::invalid_argument("TamConfig: slots must be >= 1");
  if (!(max_time > 0.0)) throw std::invalid_argument("TamConfig: max_time must be positive");
}

TamFeatures extract_tam(const Trace& x, const TamConfig& cfg) {
  cfg.validate();
  TamFeatures f;
  f.slots = cfg.slots;
  f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cfg.dimension()));
  const double slots = static_cast<double>(cfg.slots);
  for (const auto& e : x.events()) {
    const double pos = std::floor(e.timestamp * slots / cfg.max_time);
    const std::size_t slot =
        pos >= static_cast<double>(cfg.slots - 1) ? cfg.slots - 1 : static_cast<std::size_t>(pos);
    const std::size_t row = e.direction == kOutgoing ? 0 : 1;
    f.values[static_cast<Eigen::Index>(row * cfg.slots + slot)] += 1.0;
  }
  return f;
}

Eigen::MatrixXd extract_tam_matrix(const LabeledDataset& ds, const TamConfig& cfg, unsigned jobs) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(cfg.dimension()));
  parallel_for(ds.size(), jobs, [&](std::size_t i) {
    out.row(static_cast<Eigen::Index>(i)) = extract_tam(ds.entries[i].trace, cfg).values.transpose();
  });
  return out;
}

bool operator==(const SoftmaxModel& a, const SoftmaxModel& b) {
  return same(a.weights, b.weights) && same(a.bias, b.bias) && same(a.feature_mean, b.feature_mean) &&
         same(a.feature_scale, b.feature_scale);
}

Eigen::VectorXd SoftmaxModel::standardize(const Eigen::VectorXd& raw) const {
  return (raw - feature_mean).cwiseQuotient(feature_scale);
}

Eigen::MatrixXd SoftmaxModel::standardize(const Eigen::MatrixXd& raw) const {
  Eigen::MatrixXd out = raw.rowwise() - feature_mean.transpose();
  return out.array().rowwise() / feature_scale.transpose().array();
}

void SoftmaxModel::save(const std::filesystem::path& path) const {
  std::string buf;
  auto put = [&](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  const std::uint64_t c = classes(), d = dimension();
  put(kMagic, sizeof(kMagic));
  put(&c, sizeof(c));
  put(&d, sizeof(d));
  // Weights row-major so the file layout does not depend on Eigen storage.
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    for (Eigen::Index k = 0; k < weights.cols(); ++k) put(&weights(r, k), sizeof(double));
  }
  put(bias.data(), sizeof(double) * c);
  put(feature_mean.data(), sizeof(double) * d);
  put(feature_scale.data(), sizeof(double) * d);
  write_file_atomic(path, buf);
}

SoftmaxModel SoftmaxModel::load(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  std::size_t off = 0;
  auto get = [&](void* p, std::size_t n) {
    if (off + n > buf.size()) throw std::runtime_error("truncated classifier checkpoint " + path.string());
    std::memcpy(p, buf.data() + off, n);
    off += n;
  };
  char magic[8];
  get(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a classifier checkpoint: " + path.string());
  }
  std::uint64_t c = 0, d = 0;
  get(&c, sizeof(c));
  get(&d, sizeof(d));
  if (buf.size() != off + sizeof(double) * (c * d + c + 2 * d)) {
    throw std::runtime_error("classifier checkpoint size mismatch: " + path.string());
  }
  SoftmaxModel m;
  const auto C = static_cast<Eigen::Index>(c), D = static_cast<Eigen::Index>(d);
  m.weights.resize(C, D);
  for (Eigen::Index r = 0; r < C; ++r) {
    for (Eigen::Index k = 0; k < D; ++k) get(&m.weights(r, k), sizeof(double));
  }
  m.bias.resize(C);
  m.feature_mean.resize(D);
  m.feature_scale.resize(D);
  get(m.bias.data(), sizeof(double) * c);
  get(m.feature_mean.data(), sizeof(double) * d);
  get(m.feature_scale.data(), sizeof(double) * d);
  return m;
}

double classifier_loss(const SoftmaxModel& model, const Eigen::MatrixXd& standardized,
                       std::span<const int> labels) {
  Eigen::MatrixXd logits = (standardized * model.weights.transpose()).rowwise() + model.bias.transpose();
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse = mx + std::log((logits.row(r).array() - mx).exp().sum());
    total += lse - logits(r, labels[static_cast<std::size_t>(r)]);
  }
  const double n = static_cast<double>(std::max<Eigen::Index>(logits.rows(), 1));
  return total / n + 0.5 * model.hyper.l2 * model.weights.squaredNorm();
}

void classifier_gradient(const SoftmaxModel& model, const Eigen::MatrixXd& standardized,
                         std::span<const int> labels, Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b) {
  Eigen::MatrixXd probs = (standardized * model.weights.transpose()).rowwise() + model.bias.transpose();
  softmax_rows(probs);
  for (Eigen::Index r = 0; r < probs.rows(); ++r) probs(r, labels[static_cast<std::size_t>(r)]) -= 1.0;
  const double n = static_cast<double>(std::max<Eigen::Index>(probs.rows(), 1));
  grad_w = probs.transpose() * standardized / n + model.hyper.l2 * model.weights;
  grad_b = probs.colwise().sum().transpose() / n;
}

TrainedClassifier train_classifier(const Eigen::MatrixXd& features, std::span<const int> labels,
                                   int class_count, const ClassifierHyper& hyper) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw std::invalid_argument("train_classifier: feature rows and labels differ in count");
  }
  const std::set<int> present(labels.begin(), labels.end());
  if (present.size() < 2) throw std::invalid_argument("train_classifier: need at least two classes");
  for (int y : present) {
    if (y < 0 || y >= class_count) throw std::invalid_argument("train_classifier: label out of range");
  }

  TrainedClassifier out;
  SoftmaxModel& m = out.model;
  const auto D = features.cols();
  m.hyper = hyper;
  m.weights = Eigen::MatrixXd::Zero(class_count, D);
  m.bias = Eigen::VectorXd::Zero(class_count);
  m.feature_mean = features.colwise().mean().transpose();
  m.feature_scale.resize(D);
  for (Eigen::Index k = 0; k < D; ++k) {
    const double var = (features.col(k).array() - m.feature_mean[k]).square().mean();
    m.feature_scale[k] = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
  const Eigen::MatrixXd z = m.standardize(features);

  Eigen::MatrixXd gw;
  Eigen::VectorXd gb;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    classifier_gradient(m, z, labels, gw, gb);
    m.weights -= hyper.learning_rate * gw;
    m.bias -= hyper.learning_rate * gb;
  }
  out.final_loss = classifier_loss(m, z, labels);
  return out;
}

Prediction predict(const SoftmaxModel& model, const Eigen::VectorXd& raw_features) {
  if (static_cast<std::size_t>(raw_features.size()) != model.dimension()) {
    throw std::invalid_argument("predict: feature length " + std::to_string(raw_features.size()) +
                                " does not match model dimension " + std::to_string(model.dimension()));
  }
  Eigen::MatrixXd logits = (model.weights * model.standardize(raw_features) + model.bias).transpose();
  softmax_rows(logits);
  Prediction p;
  p.probabilities = logits.row(0).transpose();
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < p.probabilities.size(); ++c) {
    if (p.probabilities[c] > p.probabilities[best]) best = c;
  }
  p.label = static_cast<int>(best);
  return p;
}

std::vector<Prediction> predict_all(const SoftmaxModel& model, const Eigen::MatrixXd& raw_features) {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(raw_features.rows()));
  for (Eigen::Index r = 0; r < raw_features.rows(); ++r) {
    out.push_back(predict(model, raw_features.row(r).transpose()));
  }
  return out;
}

double feature_shift(const TamConfig& tam, const Trace& x, const Trace& x_hat) {
  return (extract_tam(x_hat, tam).values - extract_tam(x, tam).values).norm();
}

namespace {
Eigen::VectorXd sample_gradient(const SoftmaxModel& model, const Eigen::VectorXd& z, int label) {
  Eigen::MatrixXd p = (model.weights * z + model.bias).transpose();
  softmax_rows(p);
  p(0, label) -= 1.0;
  const auto C = model.weights.rows(), D = model.weights.cols();
  Eigen::VectorXd g(C * D + C);
  for (Eigen::Index c = 0; c < C; ++c) {
    g.segment(c * D, D) = p(0, c) * z;
    g[C * D + c] = p(0, c);
  }
  return g;
}
}  // namespace

GradientSimilarity gradient_similarity(const SoftmaxModel& model, const TamConfig& tam, const Trace& x,
                                       const Trace& x_hat, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= model.classes()) {
    throw std::invalid_argument("gradient_similarity: label out of range");
  }
  const auto g_clean = sample_gradient(model, model.standardize(extract_tam(x, tam).values), label);
  const auto g_pois = sample_gradient(model, model.standardize(extract_tam(x_hat, tam).values), label);
  const double nc = g_clean.norm(), np = g_pois.norm();
  GradientSimilarity out;
  if (nc == 0.0 || np == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.cosine = std::clamp(g_clean.dot(g_pois) / (nc * np), -1.0, 1.0);
  return out;
}

std::string features_csv(const Eigen::MatrixXd& features, std::span<const int> labels) {
  std::string out = "label";
  for (Eigen::Index k = 0; k < features.cols(); ++k) out += ",f" + std::to_string(k);
  out += '\n';
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    out += std::to_string(labels[static_cast<std::size_t>(r)]);
    for (Eigen::Index k = 0; k < features.cols(); ++k) out += ',' + format_double(features(r, k));
    out += '\n';
  }
  return out;
}

}  // namespace cwfd
