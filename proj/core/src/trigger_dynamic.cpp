#include "cwfd/trigger_dynamic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cwfd {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoints assume little-endian");

constexpr char kMagic[8] = {'C', 'W', 'F', 'D', 'L', 'S', 'T', 'M'};
constexpr std::uint32_t kVersion = 1;

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a))); }
double sigmoid(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

// Offsets into the flat parameter vector.
struct Layout {
  std::size_t h;
  std::size_t w_in() const { return 0; }
  std::size_t u() const { return 4 * h; }
  std::size_t b() const { return 4 * h + 4 * h * h; }
  std::size_t w_mean() const { return b() + 4 * h; }
  std::size_t b_mean() const { return w_mean() + h; }
  std::size_t w_spread() const { return b_mean() + 1; }
  std::size_t b_spread() const { return w_spread() + h; }
  std::size_t total() const { return b_spread() + 1; }
};

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Prefix groups that can share one forward pass: `start` into the sequence
// and the ends (relative to start) evaluated on that pass.
struct Group {
  std::size_t start = 0;
  std::size_t length = 0;
  std::vector<std::size_t> ends;     // relative, in [1, length]
  std::vector<std::size_t> members;  // indices into the caller's ends
};

std::vector<Group> group_prefixes(std::span<const std::size_t> ends, std::size_t seq_len,
                                  std::size_t max_prefix) {
  std::vector<Group> groups;
  Group shared;
  for (std::size_t i = 0; i < ends.size(); ++i) {
    const std::size_t e = ends[i];
    if (e < 1 || e > seq_len) throw std::invalid_argument("prefix end out of range");
    if (i && e < ends[i - 1]) throw std::invalid_argument("prefix ends must be non-decreasing");
    if (e <= max_prefix) {
      shared.length = e;
      shared.ends.push_back(e);
      shared.members.push_back(i);
    } else {
      groups.push_back({e - max_prefix, max_prefix, {max_prefix}, {i}});
    }
  }
  if (!shared.ends.empty()) groups.insert(groups.begin(), std::move(shared));
  return groups;
}

}  // namespace

struct PredictorModel::Pass {
  Eigen::VectorXd x;
  // H x T matrices; column t is the state after reading packet t.
  Eigen::MatrixXd i, f, g, o, c, h;
};

std::size_t PredictorModel::parameter_count(std::size_t hidden) { return Layout{hidden}.total(); }

PredictorModel PredictorModel::zeros(std::size_t hidden, double output_scale, double burst_cap) {
  if (hidden == 0) throw std::invalid_argument("PredictorModel: hidden width must be >= 1");
  PredictorModel m;
  m.hidden_ = hidden;
  m.output_scale_ = output_scale;
  m.burst_cap_ = burst_cap;
  m.params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count(hidden)));
  return m;
}

PredictorModel PredictorModel::random(std::size_t hidden, std::uint64_t seed, double output_scale,
                                      double burst_cap) {
  PredictorModel m = zeros(hidden, output_scale, burst_cap);
  Rng rng(seed);
  const double k = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto& p : m.params_) p = rng.uniform(-k, k);
  const Layout lay{hidden};
  m.params_[static_cast<Eigen::Index>(lay.b_mean())] = 0.0;
  m.params_[static_cast<Eigen::Index>(lay.b_spread())] = 0.0;
  return m;
}

PredictorModel::Pass PredictorModel::run(std::span<const Direction> seq) const {
  const Layout lay{hidden_};
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto T = static_cast<Eigen::Index>(seq.size());
  const Eigen::Map<const Eigen::VectorXd> w_in(params_.data() + lay.w_in(), 4 * H);
  const Eigen::Map<const RowMajor> u(params_.data() + lay.u(), 4 * H, H);
  const Eigen::Map<const Eigen::VectorXd> bias(params_.data() + lay.b(), 4 * H);

  Pass p;
  p.x.resize(T);
  p.i.resize(H, T);
  p.f.resize(H, T);
  p.g.resize(H, T);
  p.o.resize(H, T);
  p.c.resize(H, T);
  p.h.resize(H, T);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd z(4 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double xt = static_cast<double>(seq[static_cast<std::size_t>(t)]);
    p.x[t] = xt;
    z.noalias() = u * h;
    z += w_in * xt + bias;
    for (Eigen::Index k = 0; k < H; ++k) {
      const double ig = sigmoid(z[k]);
      const double fg = sigmoid(z[H + k]);
      const double gg = std::tanh(z[2 * H + k]);
      const double og = sigmoid(z[3 * H + k]);
      c[k] = fg * c[k] + ig * gg;
      h[k] = og * std::tanh(c[k]);
      p.i(k, t) = ig;
      p.f(k, t) = fg;
      p.g(k, t) = gg;
      p.o(k, t) = og;
    }
    p.c.col(t) = c;
    p.h.col(t) = h;
  }
  return p;
}

BurstDistribution PredictorModel::head(const Eigen::VectorXd& h) const {
  const Layout lay{hidden_};
  const auto H = static_cast<Eigen::Index>(hidden_);
  const Eigen::Map<const Eigen::VectorXd> w_mean(params_.data() + lay.w_mean(), H);
  const Eigen::Map<const Eigen::VectorXd> w_spread(params_.data() + lay.w_spread(), H);
  const double a = w_mean.dot(h) + params_[static_cast<Eigen::Index>(lay.b_mean())];
  const double q = w_spread.dot(h) + params_[static_cast<Eigen::Index>(lay.b_spread())];
  return {output_scale_ * softplus(a), output_scale_ * (spread_floor_ + softplus(q))};
}

void PredictorModel::backward(const Pass& pass, std::span<const std::size_t> ends,
                              std::span<const double> coef_mean, std::span<const double> coef_spread,
                              Eigen::VectorXd& grad) const {
  const Layout lay{hidden_};
  const auto H = static_cast<Eigen::Index>(hidden_);
  const auto T = pass.h.cols();
  const Eigen::Map<const RowMajor> u(params_.data() + lay.u(), 4 * H, H);
  const Eigen::Map<const Eigen::VectorXd> w_mean(params_.data() + lay.w_mean(), H);
  const Eigen::Map<const Eigen::VectorXd> w_spread(params_.data() + lay.w_spread(), H);
  Eigen::Map<Eigen::VectorXd> g_w_in(grad.data() + lay.w_in(), 4 * H);
  Eigen::Map<RowMajor> g_u(grad.data() + lay.u(), 4 * H, H);
  Eigen::Map<Eigen::VectorXd> g_b(grad.data() + lay.b(), 4 * H);
  Eigen::Map<Eigen::VectorXd> g_w_mean(grad.data() + lay.w_mean(), H);
  Eigen::Map<Eigen::VectorXd> g_w_spread(grad.data() + lay.w_spread(), H);
  const double b_mean = params_[static_cast<Eigen::Index>(lay.b_mean())];
  const double b_spread = params_[static_cast<Eigen::Index>(lay.b_spread())];

  // Head contributions, collected as dL/dh per time step.
  Eigen::MatrixXd dh_in = Eigen::MatrixXd::Zero(H, T);
  for (std::size_t n = 0; n < ends.size(); ++n) {
    const auto t = static_cast<Eigen::Index>(ends[n] - 1);
    const auto h = pass.h.col(t);
    const double a = w_mean.dot(h) + b_mean;
    const double q = w_spread.dot(h) + b_spread;
    const double dm = coef_mean[n] * output_scale_ * sigmoid(a);
    const double ds = coef_spread[n] * output_scale_ * sigmoid(q);
    g_w_mean += dm * h;
    grad[static_cast<Eigen::Index>(lay.b_mean())] += dm;
    g_w_spread += ds * h;
    grad[static_cast<Eigen::Index>(lay.b_spread())] += ds;
    dh_in.col(t) += dm * w_mean + ds * w_spread;
  }

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(H);
  Eigen::VectorXd dz(4 * H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Eigen::VectorXd dh = dh_next + dh_in.col(t);
    for (Eigen::Index k = 0; k < H; ++k) {
      const double ig = pass.i(k, t), fg = pass.f(k, t), gg = pass.g(k, t), og = pass.o(k, t);
      const double tc = std::tanh(pass.c(k, t));
      const double c_prev = t > 0 ? pass.c(k, t - 1) : 0.0;
      const double dc = dc_next[k] + dh[k] * og * (1.0 - tc * tc);
      dz[k] = dc * gg * ig * (1.0 - ig);
      dz[H + k] = dc * c_prev * fg * (1.0 - fg);
      dz[2 * H + k] = dc * ig * (1.0 - gg * gg);
      dz[3 * H + k] = dh[k] * tc * og * (1.0 - og);
      dc_next[k] = dc * fg;
    }
    g_w_in += dz * pass.x[t];
    g_b += dz;
    if (t > 0) {
      g_u.noalias() += dz * pass.h.col(t - 1).transpose();
    }
    dh_next.noalias() = u.transpose() * dz;
  }
}

std::vector<BurstDistribution> PredictorModel::distributions_at(
    std::span<const Direction> seq, std::span<const std::size_t> ends) const {
  std::vector<BurstDistribution> out(ends.size());
  for (const auto& grp : group_prefixes(ends, seq.size(), max_prefix_)) {
    const Pass pass = run(seq.subspan(grp.start, grp.length));
    for (std::size_t n = 0; n < grp.ends.size(); ++n) {
      out[grp.members[n]] = head(pass.h.col(static_cast<Eigen::Index>(grp.ends[n] - 1)));
    }
  }
  return out;
}

BurstDistribution PredictorModel::distribution(std::span<const Direction> prefix) const {
  if (prefix.empty()) throw std::invalid_argument("predictor: prefix must be non-empty");
  const std::size_t end = prefix.size();
  return distributions_at(prefix, std::span<const std::size_t>(&end, 1)).front();
}

Eigen::VectorXd PredictorModel::head_gradient(std::span<const Direction> seq,
                                              std::span<const std::size_t> ends,
                                              std::span<const double> coef_mean,
                                              std::span<const double> coef_spread) const {
  if (coef_mean.size() != ends.size() || coef_spread.size() != ends.size()) {
    throw std::invalid_argument("head_gradient: coefficient count mismatch");
  }
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  for (const auto& grp : group_prefixes(ends, seq.size(), max_prefix_)) {
    const Pass pass = run(seq.subspan(grp.start, grp.length));
    std::vector<double> cm, cs;
    for (auto idx : grp.members) {
      cm.push_back(coef_mean[idx]);
      cs.push_back(coef_spread[idx]);
    }
    backward(pass, grp.ends, cm, cs, grad);
  }
  return grad;
}

void PredictorModel::save(const std::filesystem::path& path) const {
  std::string buf;
  auto put = [&](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  const std::uint64_t h = hidden_, mp = max_prefix_, count = static_cast<std::uint64_t>(params_.size());
  put(kMagic, sizeof(kMagic));
  put(&kVersion, sizeof(kVersion));
  put(&h, sizeof(h));
  put(&output_scale_, sizeof(double));
  put(&burst_cap_, sizeof(double));
  put(&spread_floor_, sizeof(double));
  put(&mp, sizeof(mp));
  put(&count, sizeof(count));
  put(params_.data(), sizeof(double) * params_.size());
  write_file_atomic(path, buf);
}

PredictorModel PredictorModel::load(const std::filesystem::path& path) {
  const std::string buf = read_file(path);
  std::size_t off = 0;
  auto get = [&](void* p, std::size_t n) {
    if (off + n > buf.size()) throw std::runtime_error("truncated predictor checkpoint " + path.string());
    std::memcpy(p, buf.data() + off, n);
    off += n;
  };
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t h = 0, mp = 0, count = 0;
  get(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a predictor checkpoint: " + path.string());
  }
  get(&version, sizeof(version));
  if (version != kVersion) throw std::runtime_error("unsupported predictor checkpoint version");
  PredictorModel m;
  get(&h, sizeof(h));
  get(&m.output_scale_, sizeof(double));
  get(&m.burst_cap_, sizeof(double));
  get(&m.spread_floor_, sizeof(double));
  get(&mp, sizeof(mp));
  get(&count, sizeof(count));
  if (h == 0 || count != parameter_count(h)) throw std::runtime_error("predictor checkpoint size mismatch");
  m.hidden_ = h;
  m.max_prefix_ = mp;
  m.params_.resize(static_cast<Eigen::Index>(count));
  get(m.params_.data(), sizeof(double) * count);
  if (off != buf.size()) throw std::runtime_error("trailing bytes in predictor checkpoint");
  return m;
}

std::size_t quantize_burst(double raw, double cap) {
  if (!(raw > 0.0)) return 0;
  return static_cast<std::size_t>(std::llround(std::min(raw, cap)));
}

std::size_t predict_burst(const PredictorModel& model, std::span<const Direction> prefix, BurstMode mode,
                          Rng* rng) {
  const auto d = model.distribution(prefix);
  if (mode == BurstMode::kMode) return quantize_burst(d.mean, model.burst_cap());
  if (!rng) throw std::invalid_argument("predict_burst: sampling mode needs an rng");
  return quantize_burst(d.mean + d.spread * rng->normal(), model.burst_cap());
}

double burst_log_prob(const PredictorModel& model, std::span<const Direction> prefix, double raw) {
  const auto d = model.distribution(prefix);
  const double z = (raw - d.mean) / d.spread;
  return -0.5 * z * z - std::log(d.spread) - 0.5 * std::log(2.0 * std::numbers::pi);
}

Eigen::VectorXd burst_log_prob_gradient(const PredictorModel& model, std::span<const Direction> prefix,
                                        double raw) {
  const auto d = model.distribution(prefix);
  const double r = raw - d.mean;
  const double cm = r / (d.spread * d.spread);
  const double cs = r * r / (d.spread * d.spread * d.spread) - 1.0 / d.spread;
  const std::size_t end = prefix.size();
  return model.head_gradient(prefix, std::span<const std::size_t>(&end, 1),
                             std::span<const double>(&cm, 1), std::span<const double>(&cs, 1));
}

double sequence_loss(const Trace& x, const Trace& x_hat, const DistanceConfig& dist) {
  return -fast_lev(x, x_hat, dist);
}

double constraint_loss(std::span<const double> bursts, double cap) {
  const double diff = std::accumulate(bursts.begin(), bursts.end(), 0.0) - cap;
  return diff * diff;
}

std::vector<double> constraint_loss_gradient(std::span<const double> bursts, double cap) {
  const double diff = std::accumulate(bursts.begin(), bursts.end(), 0.0) - cap;
  return std::vector<double>(bursts.size(), 2.0 * diff);
}

double mean_constraint_loss(const PredictorModel& model, std::span<const Direction> seq,
                            std::span<const std::size_t> ends, double cap) {
  std::vector<double> means;
  for (const auto& d : model.distributions_at(seq, ends)) means.push_back(d.mean);
  return constraint_loss(means, cap);
}

Eigen::VectorXd mean_constraint_gradient(const PredictorModel& model, std::span<const Direction> seq,
                                         std::span<const std::size_t> ends, double cap) {
  std::vector<double> means;
  for (const auto& d : model.distributions_at(seq, ends)) means.push_back(d.mean);
  const auto dmean = constraint_loss_gradient(means, cap);
  const std::vector<double> dspread(ends.size(), 0.0);
  return model.head_gradient(seq, ends, dmean, dspread);
}

void DynTrainConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("DynTrainConfig: lambda must be >= 0");
  if (!(learning_rate > 0.0) && learning_rate != 0.0) {
    throw std::invalid_argument("DynTrainConfig: learning_rate must be >= 0");
  }
  if (bursts < 1) throw std::invalid_argument("DynTrainConfig: bursts must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("DynTrainConfig: batch_size must be >= 1");
  if (hidden < 1) throw std::invalid_argument("DynTrainConfig: hidden must be >= 1");
  if (max_prefix < 1) throw std::invalid_argument("DynTrainConfig: max_prefix must be >= 1");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw std::invalid_argument("DynTrainConfig: baseline_decay must be in [0, 1)");
  }
}

std::string DynTrainConfig::to_text() const {
  std::ostringstream os;
  os << "lambda=" << format_double(lambda) << '\n'
     << "delta_max=" << delta_max << '\n'
     << "bursts=" << bursts << '\n'
     << "learning_rate=" << format_double(learning_rate) << '\n'
     << "batch_size=" << batch_size << '\n'
     << "epochs=" << epochs << '\n'
     << "rng_seed=" << rng_seed << '\n'
     << "baseline_decay=" << format_double(baseline_decay) << '\n'
     << "hidden=" << hidden << '\n'
     << "max_prefix=" << max_prefix << '\n'
     << "spread_floor=" << format_double(spread_floor) << '\n';
  return os.str();
}

DynTrainResult train_dynamic(const LabeledDataset& dataset, const DynTrainConfig& cfg,
                             const DistanceConfig& dist, const PredictorModel* initial) {
  cfg.validate();
  if (dataset.empty()) throw std::invalid_argument("train_dynamic: dataset is empty");
  DynTrainResult result;
  if (cfg.delta_max == 0 && cfg.lambda > 0.0) {
    result.warnings.push_back("delta_max is 0: bursts collapse to zero");
  }
  const double cap = static_cast<double>(cfg.delta_max);
  if (initial) {
    result.model = *initial;
  } else {
    const double scale = std::max(1.0, cap / static_cast<double>(cfg.bursts));
    result.model = PredictorModel::random(cfg.hidden, derive_seed(cfg.rng_seed, 0), scale, cap);
    result.model.set_spread_floor(cfg.spread_floor);
    result.model.set_max_prefix(cfg.max_prefix);
  }
  PredictorModel& model = result.model;
  if (cfg.learning_rate == 0.0) return result;

  const auto n_params = model.params().size();
  Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(n_params);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::size_t step = 0;

  Rng rng(derive_seed(cfg.rng_seed, 1));
  bool have_baseline = false;
  double baseline = 0.0;

  std::vector<std::size_t> order(dataset.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_params);
      double reward_sum = 0.0, seq_sum = 0.0, total_sum = 0.0;

      for (std::size_t n = start; n < stop; ++n) {
        const Trace& x = dataset.entries[order[n]].trace;
        const auto seq = direction_sequence(x);
        if (seq.size() < 2) continue;
        auto ends = rng.sample_without_replacement(seq.size() - 1, cfg.bursts);
        for (auto& e : ends) e += 1;  // insertion index in [1, L)
        std::sort(ends.begin(), ends.end());

        const auto dists = model.distributions_at(seq, ends);
        std::vector<double> raw(ends.size());
        std::vector<std::size_t> bursts(ends.size());
        double mean_sum = 0.0;
        for (std::size_t k = 0; k < ends.size(); ++k) {
          raw[k] = dists[k].mean + dists[k].spread * rng.normal();
          bursts[k] = quantize_burst(raw[k], cap);
          mean_sum += dists[k].mean;
        }
        const TriggerPlan plan(ends, bursts);
        const double d_f = fast_lev(x, inject(x, plan), dist);
        const double excess = static_cast<double>(plan.total()) - cap;
        const double reward = d_f - cfg.lambda * excess * excess;
        reward_sum += reward;
        seq_sum += d_f;
        total_sum += static_cast<double>(plan.total());

        const double advantage = have_baseline ? d_f - baseline : 0.0;
        std::vector<double> cm(ends.size()), cs(ends.size());
        for (std::size_t k = 0; k < ends.size(); ++k) {
          const double r = raw[k] - dists[k].mean;
          const double s = dists[k].spread;
          cm[k] = advantage * r / (s * s) - cfg.lambda * 2.0 * (mean_sum - cap);
          cs[k] = advantage * (r * r / (s * s * s) - 1.0 / s);
        }
        grad += model.head_gradient(seq, ends, cm, cs);
      }

      const double count = static_cast<double>(stop - start);
      const double batch_seq = seq_sum / count;
      baseline = have_baseline ? cfg.baseline_decay * baseline + (1.0 - cfg.baseline_decay) * batch_seq
                               : batch_seq;
      have_baseline = true;
      result.batch_mean_reward.push_back(reward_sum / count);
      result.batch_mean_total.push_back(total_sum / count);

      // Gradient ascent on expected reward.
      grad /= count;
      ++step;
      adam_m = kBeta1 * adam_m + (1.0 - kBeta1) * grad;
      adam_v = kBeta2 * adam_v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      const Eigen::ArrayXd update =
          (adam_m.array() / c1) / ((adam_v.array() / c2).sqrt() + kEps);
      model.params().array() += cfg.learning_rate * update;
      if (!model.finite()) throw std::runtime_error("train_dynamic: parameters became non-finite");
    }
  }
  return result;
}

IndexRange effective_region(IndexRange region, std::size_t len, std::size_t m) {
  IndexRange r;
  r.end = std::min(region.end, len);
  r.begin = std::clamp<std::size_t>(region.begin, 1, std::max<std::size_t>(r.end, 1));
  if (r.end < r.begin + m) r.begin = std::min<std::size_t>(1, r.end);
  return r;
}

namespace {
std::vector<std::size_t> draw_indices(std::size_t m, IndexRange region, std::uint64_t seed) {
  const std::size_t lo = std::max<std::size_t>(region.begin, 1);
  if (region.end <= lo || m == 0) return {};
  Rng rng(seed);
  auto idx = rng.sample_without_replacement(region.end - lo, m);
  for (auto& k : idx) k += lo;
  std::sort(idx.begin(), idx.end());
  return idx;
}
}  // namespace

TriggerPlan infer_plan(const PredictorModel& model, const PrefixProvider& prefix, std::size_t m,
                       IndexRange region, std::uint64_t seed) {
  auto locations = draw_indices(m, region, seed);
  std::vector<std::size_t> bursts;
  for (auto k : locations) bursts.push_back(predict_burst(model, prefix(k)));
  return TriggerPlan(std::move(locations), std::move(bursts));
}

TriggerPlan infer_plan(const PredictorModel& model, const Trace& x, std::size_t m, IndexRange region,
                       std::uint64_t seed) {
  auto locations = draw_indices(m, effective_region(region, x.size(), m), seed);
  if (locations.empty()) return {};
  const auto seq = direction_sequence(x);
  std::vector<std::size_t> bursts;
  for (const auto& d : model.distributions_at(seq, locations)) {
    bursts.push_back(quantize_burst(d.mean, model.burst_cap()));
  }
  return TriggerPlan(std::move(locations), std::move(bursts));
}

}  // namespace cwfd
