#include "cwfd/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "cwfd/util.hpp"

namespace cwfd {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    out.emplace_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || p != last) {
    throw std::invalid_argument("config " + key + ": cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("config " + key + ": expected a boolean, got '" + text + "'");
}

// Keys left out of the run hash: they choose where and how fast, not what.
bool hashed(const std::string& key) { return key != "run.out" && key != "run.jobs"; }

std::string target_dir_name(int target) { return "target-" + std::to_string(target); }

std::map<std::string, double> numeric_fields(const EvalReport& r) {
  std::map<std::string, double> out;
  std::istringstream in(r.to_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string value = line.substr(eq + 1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec == std::errc{} && p == value.data() + value.size()) out[line.substr(0, eq)] = v;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExperimentConfig

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.values_ = {
      {"dataset.path", "data"},
      {"dataset.mode", "closed"},
      {"dataset.per_class_cap", "none"},
      {"trigger.type", "static"},
      {"trigger.weight", "heavy"},
      {"trigger.test_weight", "same"},
      {"trigger.bursts", "7"},
      {"trigger.pool_size", "20"},
      {"trigger.iterations", "3"},
      {"trigger.region_begin", "50"},
      {"trigger.region_end", "1500"},
      {"poison.rate", "0.01"},
      {"poison.target", "0"},
      {"dynamic.lambda", "1"},
      {"dynamic.learning_rate", "4e-06"},
      {"dynamic.batch_size", "1024"},
      {"dynamic.epochs", "1"},
      {"dynamic.hidden", "64"},
      {"dynamic.baseline_decay", "0.9"},
      {"dynamic.max_prefix", "2000"},
      {"dynamic.spread_floor", "0.05"},
      {"distance.band", "512"},
      {"distance.max_length", "10000"},
      {"distance.insertion", "1"},
      {"distance.deletion", "1"},
      {"distance.substitution", "1"},
      {"attacker.slots", "64"},
      {"attacker.max_time", "80"},
      {"attacker.learning_rate", "0.5"},
      {"attacker.epochs", "500"},
      {"attacker.l2", "0.0001"},
      {"eval.pill", "red"},
      {"eval.random_removal", "false"},
      {"run.seed", "1"},
      {"run.out", "cwfd-out"},
      {"run.jobs", "1"},
  };
  return c;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second = value;
}

void ExperimentConfig::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument("override must look like section.key=value: '" + std::string(assignment) + "'");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  return it->second;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig c = defaults();
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad section");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (section == "sweep") {
      if (!c.values_.contains(key)) throw std::invalid_argument("sweep over unknown key '" + key + "'");
      c.sweep_[key] = split_list(value);
    } else {
      c.set(section.empty() ? key : section + "." + key, value);
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + value + '\n';
  }
  if (!sweep_.empty()) {
    out += "\n[sweep]\n";
    for (const auto& [key, list] : sweep_) {
      out += key + " = ";
      for (std::size_t i = 0; i < list.size(); ++i) out += (i ? "," : "") + list[i];
      out += '\n';
    }
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = fnv1a64("cwfd-config-v1");
  for (const auto& [key, value] : values_) {
    if (!hashed(key)) continue;
    h = fnv1a64(key + "=" + value + "\n", h);
  }
  for (const auto& [key, list] : sweep_) {
    h = fnv1a64("sweep:" + key, h);
    for (const auto& v : list) h = fnv1a64("," + v, h);
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::vector<ExperimentConfig> ExperimentConfig::expand_sweep() const {
  ExperimentConfig base = *this;
  base.sweep_.clear();
  std::vector<ExperimentConfig> grid{base};
  for (const auto& [key, list] : sweep_) {
    std::vector<ExperimentConfig> next;
    for (const auto& cfg : grid) {
      for (const auto& v : list) {
        ExperimentConfig c = cfg;
        c.set(key, v);
        next.push_back(std::move(c));
      }
    }
    grid = std::move(next);
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Settings

Settings Settings::from(const ExperimentConfig& cfg) {
  Settings s;
  auto str = [&](const char* k) -> const std::string& { return cfg.get(k); };
  auto size = [&](const char* k) { return parse_number<std::size_t>(k, str(k)); };
  auto real = [&](const char* k) { return parse_number<double>(k, str(k)); };

  s.dataset = str("dataset.path");
  const auto& mode = str("dataset.mode");
  if (mode == "closed") {
    s.world = WorldMode::kClosed;
  } else if (mode == "open") {
    s.world = WorldMode::kOpen;
  } else {
    throw std::invalid_argument("dataset.mode must be closed or open");
  }
  if (str("dataset.per_class_cap") != "none") s.per_class_cap = size("dataset.per_class_cap");

  const auto& type = str("trigger.type");
  if (type == "static") {
    s.trigger = TriggerMode::kStatic;
  } else if (type == "dynamic") {
    s.trigger = TriggerMode::kDynamic;
  } else {
    throw std::invalid_argument("trigger.type must be static or dynamic");
  }
  s.weight = str("trigger.weight");
  s.test_weight = str("trigger.test_weight") == "same" ? std::string{} : str("trigger.test_weight");
  s.bursts = size("trigger.bursts");
  s.pool_size = size("trigger.pool_size");
  s.iterations = size("trigger.iterations");
  s.region = {size("trigger.region_begin"), size("trigger.region_end")};

  s.poison_rate = real("poison.rate");
  s.target = str("poison.target");

  s.dynamic.lambda = real("dynamic.lambda");
  s.dynamic.learning_rate = real("dynamic.learning_rate");
  s.dynamic.batch_size = size("dynamic.batch_size");
  s.dynamic.epochs = size("dynamic.epochs");
  s.dynamic.hidden = size("dynamic.hidden");
  s.dynamic.baseline_decay = real("dynamic.baseline_decay");
  s.dynamic.max_prefix = size("dynamic.max_prefix");
  s.dynamic.spread_floor = real("dynamic.spread_floor");
  s.dynamic.bursts = s.bursts;

  s.distance.band_width = size("distance.band");
  s.distance.max_length = size("distance.max_length");
  s.distance.insertion = real("distance.insertion");
  s.distance.deletion = real("distance.deletion");
  s.distance.substitution = real("distance.substitution");
  s.distance.validate();

  s.tam.slots = size("attacker.slots");
  s.tam.max_time = real("attacker.max_time");
  s.tam.validate();
  s.classifier.learning_rate = real("attacker.learning_rate");
  s.classifier.epochs = size("attacker.epochs");
  s.classifier.l2 = real("attacker.l2");

  const auto& pill = str("eval.pill");
  if (pill == "red") {
    s.pill = Pill::kRed;
  } else if (pill == "blue") {
    s.pill = Pill::kBlue;
  } else {
    throw std::invalid_argument("eval.pill must be red or blue");
  }
  s.random_removal = parse_bool("eval.random_removal", str("eval.random_removal"));

  s.seed = parse_number<std::uint64_t>("run.seed", str("run.seed"));
  s.out = str("run.out");
  s.jobs = static_cast<unsigned>(std::max<std::size_t>(1, size("run.jobs")));
  s.dynamic.rng_seed = derive_seed(s.seed, 10);
  return s;
}

std::size_t resolve_budget(const std::string& weight, const LabeledDataset& reference) {
  if (weight == "light") return 4000;
  if (weight == "heavy") return 20000;
  if (weight.starts_with("scaled:")) {
    const double f = parse_number<double>("trigger.weight", weight.substr(7));
    if (!(f >= 0.0)) throw std::invalid_argument("trigger.weight: scale must be non-negative");
    if (reference.empty()) throw std::invalid_argument("trigger.weight: scaled budget needs a dataset");
    double total = 0.0;
    for (const auto& e : reference.entries) total += static_cast<double>(e.trace.size());
    return static_cast<std::size_t>(std::llround(f * total / static_cast<double>(reference.size())));
  }
  return parse_number<std::size_t>("trigger.weight", weight);
}

Split split_of(const std::string& name) {
  const auto bucket = fnv1a64(name) % 10;
  if (bucket < 8) return Split::kTrain;
  return bucket == 8 ? Split::kValidation : Split::kTest;
}

LabeledDataset select_split(const LabeledDataset& ds, Split split) {
  LabeledDataset out;
  out.class_count = ds.class_count;
  for (const auto& e : ds.entries) {
    if (split_of(e.name) == split) out.entries.push_back(e);
  }
  return out;
}

std::filesystem::path output_root(const Settings& settings) {
  if (const char* env = std::getenv("CWFD_OUT_ROOT"); env && *env) return env;
  return settings.out;
}

std::vector<int> resolve_targets(const std::string& target, int monitored_classes, std::uint64_t seed) {
  if (monitored_classes < 1) throw std::invalid_argument("no monitored classes to target");
  if (target.starts_with("random:")) {
    const auto n = parse_number<std::size_t>("poison.target", target.substr(7));
    Rng rng(derive_seed(seed, 40));
    const auto picks = rng.sample_without_replacement(static_cast<std::size_t>(monitored_classes), n);
    return {picks.begin(), picks.end()};
  }
  const int t = parse_number<int>("poison.target", target);
  if (t < 0 || t >= monitored_classes) {
    throw std::invalid_argument("poison.target " + target + " is not a monitored class");
  }
  return {t};
}

std::map<std::string, std::string> summarize(const std::vector<EvalReport>& reports) {
  std::map<std::string, std::vector<double>> columns;
  for (const auto& r : reports) {
    for (const auto& [k, v] : numeric_fields(r)) columns[k].push_back(v);
  }
  std::map<std::string, std::string> out;
  for (const auto& [k, vs] : columns) {
    if (vs.size() != reports.size()) continue;
    const double mean = std::accumulate(vs.begin(), vs.end(), 0.0) / static_cast<double>(vs.size());
    double var = 0.0;
    for (double v : vs) var += (v - mean) * (v - mean);
    const double sd = vs.size() > 1 ? std::sqrt(var / static_cast<double>(vs.size() - 1)) : 0.0;
    out[k + "_mean"] = format_double(mean);
    out[k + "_std"] = format_double(sd);
  }
  out["runs"] = std::to_string(reports.size());
  return out;
}

// ---------------------------------------------------------------------------
// Stages

Stages::Stages(Settings settings, std::filesystem::path dir) : settings_(std::move(settings)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

const LabeledDataset& Stages::ingest() {
  if (dataset_) return *dataset_;
  LoadOptions opts;
  opts.per_class_cap = settings_.per_class_cap;
  opts.open_world = settings_.world == WorldMode::kOpen;
  opts.jobs = settings_.jobs;
  LoadDiagnostics diag;
  dataset_ = load_dataset(settings_.dataset, opts, &diag);
  if (dataset_->empty()) throw std::runtime_error("dataset " + settings_.dataset.string() + " has no traces");

  std::string split_text, warn_text;
  for (const auto& e : dataset_->entries) {
    const Split s = split_of(e.name);
    split_text += e.name + (s == Split::kTrain ? "\ttrain\n" : s == Split::kValidation ? "\tval\n" : "\ttest\n");
  }
  for (const auto& w : diag.warnings) warn_text += w + '\n';
  write_file_atomic(dir_ / "split.txt", split_text);
  write_file_atomic(dir_ / "ingest_warnings.txt", warn_text);
  return *dataset_;
}

std::size_t Stages::train_budget() { return resolve_budget(settings_.weight, ingest()); }

std::size_t Stages::test_budget() {
  return resolve_budget(settings_.test_weight.empty() ? settings_.weight : settings_.test_weight, ingest());
}

PoisonConfig Stages::poison_config(int target) const {
  PoisonConfig p;
  p.target_label = target;
  p.poison_rate = settings_.poison_rate;
  p.mode = settings_.trigger;
  p.bursts = settings_.bursts;
  p.rng_seed = derive_seed(settings_.seed, 20 + static_cast<std::uint64_t>(target));
  return p;
}

TriggerSource Stages::trigger_source() const {
  TriggerSource src;
  src.static_opt.pool_size = settings_.pool_size;
  src.static_opt.num_iterations = settings_.iterations;
  src.distance = settings_.distance;
  src.region = settings_.region;
  src.jobs = settings_.jobs;
  src.predictor = predictor_ ? &*predictor_ : nullptr;
  return src;
}

const PredictorModel* Stages::train_trigger() {
  if (settings_.trigger != TriggerMode::kDynamic) return nullptr;
  if (predictor_) return &*predictor_;
  const auto path = dir_ / "predictor.bin";
  if (std::filesystem::exists(path)) {
    predictor_ = PredictorModel::load(path);
    return &*predictor_;
  }
  DynTrainConfig cfg = settings_.dynamic;
  cfg.delta_max = train_budget();
  const auto result = train_dynamic(select_split(ingest(), Split::kTrain), cfg, settings_.distance);
  predictor_ = result.model;
  predictor_->save(path);
  std::string log = cfg.to_text();
  for (std::size_t i = 0; i < result.batch_mean_reward.size(); ++i) {
    log += "batch" + std::to_string(i) + "_reward=" + format_double(result.batch_mean_reward[i]) + '\n';
    log += "batch" + std::to_string(i) + "_total=" + format_double(result.batch_mean_total[i]) + '\n';
  }
  for (const auto& w : result.warnings) log += "warning=" + w + '\n';
  write_file_atomic(dir_ / "predictor.cfg.txt", log);
  return &*predictor_;
}

PoisonResult Stages::poison(int target) {
  train_trigger();
  const auto train = select_split(ingest(), Split::kTrain);
  PoisonConfig pcfg = poison_config(target);
  pcfg.train_budget = train_budget();
  pcfg.test_budget = test_budget();
  auto result = poison_trainset(train, pcfg, trigger_source());

  const auto tdir = dir_ / target_dir_name(target);
  save_poisoned(result.dataset, tdir / "poisoned", tdir / "poisoned.txt");
  std::string plans;
  for (std::size_t i = 0; i < result.poisoned_indices.size(); ++i) {
    plans += result.dataset.entries[result.poisoned_indices[i]].name + '\t' + result.plans[i].to_string() + '\n';
  }
  write_file_atomic(tdir / "plans_train.txt", plans);
  return result;
}

PoisonResult Stages::load_poisoned(int target) {
  const auto tdir = dir_ / target_dir_name(target);
  const auto& original = ingest();
  LoadOptions opts;
  opts.open_world = settings_.world == WorldMode::kOpen;
  opts.jobs = settings_.jobs;
  PoisonResult result;
  result.dataset = load_dataset(tdir / "poisoned", opts);
  result.dataset.class_count = original.class_count;

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < result.dataset.size(); ++i) index[result.dataset.entries[i].name] = i;
  std::istringstream in(read_file(tdir / "plans_train.txt"));
  std::string line;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos) continue;
    auto it = index.find(line.substr(0, tab));
    if (it == index.end()) throw std::runtime_error("plans_train.txt names an unknown trace: " + line.substr(0, tab));
    result.dataset.entries[it->second].poisoned = true;
    result.poisoned_indices.push_back(it->second);
    result.plans.push_back(TriggerPlan::parse(line.substr(tab + 1)));
  }
  return result;
}

void Stages::train_attacker(int target, const PoisonResult& poisoned) {
  const auto& ds = poisoned.dataset;
  const auto labels = ds.labels();
  auto trained = train_classifier(extract_tam_matrix(ds, settings_.tam, settings_.jobs), labels, ds.class_count,
                                  settings_.classifier);
  attacker_ = trained.model;

  if (!control_) {
    const auto control_path = dir_ / "control.bin";
    if (std::filesystem::exists(control_path)) {
      control_ = SoftmaxModel::load(control_path);
    } else {
      const auto clean = select_split(ingest(), Split::kTrain);
      control_ = train_classifier(extract_tam_matrix(clean, settings_.tam, settings_.jobs), clean.labels(),
                                  clean.class_count, settings_.classifier)
                     .model;
      control_->save(control_path);
    }
  }
  attacker_->save(dir_ / target_dir_name(target) / "attacker.bin");
  write_file_atomic(dir_ / target_dir_name(target) / "attacker_loss.txt",
                    "final_loss=" + format_double(trained.final_loss) + '\n');
}

EvalReport Stages::evaluate(int target) {
  const auto tdir = dir_ / target_dir_name(target);
  if (!attacker_) attacker_ = SoftmaxModel::load(tdir / "attacker.bin");
  if (!control_) control_ = SoftmaxModel::load(dir_ / "control.bin");
  if (settings_.trigger == TriggerMode::kDynamic) train_trigger();

  const auto test = select_split(ingest(), Split::kTest);
  if (test.empty()) throw std::runtime_error("test split is empty");
  const auto labels = test.labels();
  const auto features = extract_tam_matrix(test, settings_.tam, settings_.jobs);
  const auto preds = predict_all(*attacker_, features);
  const auto control_preds = predict_all(*control_, features);

  EvalReport report;
  report.clean_accuracy = closed_world_accuracy(preds, labels);
  report.control_clean_accuracy = closed_world_accuracy(control_preds, labels);

  const auto blue = apply_blue_pill(test);
  const auto blue_preds = predict_all(*attacker_, extract_tam_matrix(blue, settings_.tam, settings_.jobs));
  bool identical = blue_preds.size() == preds.size();
  for (std::size_t i = 0; identical && i < preds.size(); ++i) {
    identical = blue_preds[i].label == preds[i].label && blue_preds[i].probabilities == preds[i].probabilities;
  }
  report.extra["blue_pill_identical"] = identical ? "1" : "0";
  report.extra["target_label"] = std::to_string(target);
  report.extra["test_size"] = std::to_string(test.size());
  write_file_atomic(tdir / "features.csv", features_csv(features, labels));

  const bool open = settings_.world == WorldMode::kOpen;
  const int unmonitored = test.class_count - 1;
  auto monitored = [&](int y) { return !open || y != unmonitored; };
  std::vector<Prediction> eval_preds = preds;

  if (settings_.pill == Pill::kRed) {
    PoisonConfig pcfg = poison_config(target);
    pcfg.train_budget = train_budget();
    pcfg.test_budget = test_budget();
    const auto red = apply_red_pill(test, pcfg, trigger_source());
    const auto red_features = extract_tam_matrix(red.dataset, settings_.tam, settings_.jobs);
    const auto red_preds = predict_all(*attacker_, red_features);
    const auto red_control = predict_all(*control_, red_features);
    report.red_pill_target_rate = target_rate(red_preds, labels, target);
    report.control_target_rate = target_rate(red_control, labels, target);
    report.data_overhead = data_overhead(test, red.dataset);
    report.data_overhead_per_trace = data_overhead_per_trace(test, red.dataset);
    report.time_overhead = time_overhead(test, red.dataset).percent;
    report.extra["red_pill_accuracy"] = format_double(closed_world_accuracy(red_preds, labels));
    write_file_atomic(tdir / "features_red.csv", features_csv(red_features, labels));

    if (settings_.random_removal) {
      const auto rr = random_removal(red.dataset, test_budget(), settings_.bursts, derive_seed(settings_.seed, 30));
      const auto rr_preds = predict_all(*attacker_, extract_tam_matrix(rr, settings_.tam, settings_.jobs));
      report.rr_target_rate = target_rate(rr_preds, labels, target);
    }
    eval_preds = red_preds;
  }

  if (open) {
    const auto sweep = pr_sweep(eval_preds, labels, monitored);
    report.pr_points = sweep.points;
    report.map = sweep.average_precision;
    report.extra["pr_monotone"] = pr_monotone(sweep) ? "1" : "0";
    report.extra["pr_precision_non_increasing"] = precision_non_increasing(sweep) ? "1" : "0";
  }

  report.validate();
  write_file_atomic(tdir / "report.txt", report.to_text());
  write_file_atomic(tdir / "pr.csv", report.pr_csv());
  return report;
}

EvalReport run_single(const Settings& settings, int target, const std::filesystem::path& dir) {
  Stages stages(settings, dir);
  run_stage("ingest", [&] { return stages.ingest().size(); });
  run_stage("train-trigger", [&] { return stages.train_trigger(); });
  const auto poisoned = run_stage("poison", [&] { return stages.poison(target); });
  run_stage("train-attacker", [&] {
    stages.train_attacker(target, poisoned);
    return 0;
  });
  return run_stage("eval", [&] { return stages.evaluate(target); });
}

std::vector<ExperimentOutcome> run_experiment(const ExperimentConfig& cfg) {
  const Settings top = run_stage("config", [&] { return Settings::from(cfg); });
  const auto root = output_root(top) / cfg.hash_hex();
  std::filesystem::create_directories(root);

  const auto grid = cfg.expand_sweep();
  std::vector<ExperimentOutcome> outcomes;
  std::string manifest = "# cwfd experiment manifest\n# config_hash = " + cfg.hash_hex() + "\n";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const Settings s = run_stage("config", [&] { return Settings::from(grid[g]); });
    ExperimentOutcome outcome;
    outcome.dir = grid.size() == 1 ? root : root / ("sweep-" + std::to_string(g));

    Stages stages(s, outcome.dir);
    const auto& ds = run_stage("ingest", [&]() -> const LabeledDataset& { return stages.ingest(); });
    const int monitored = s.world == WorldMode::kOpen ? ds.class_count - 1 : ds.class_count;
    outcome.targets = run_stage("config", [&] { return resolve_targets(s.target, monitored, s.seed); });
    run_stage("train-trigger", [&] { return stages.train_trigger(); });
    manifest += "# point " + std::to_string(g) + ": dir = " + outcome.dir.filename().string() +
                ", seed = " + std::to_string(s.seed) + ", targets =";
    for (int t : outcome.targets) manifest += " " + std::to_string(t);
    manifest += ", train_budget = " + std::to_string(stages.train_budget()) +
                ", test_budget = " + std::to_string(stages.test_budget()) + "\n";

    for (int t : outcome.targets) {
      const auto poisoned = run_stage("poison", [&] { return stages.poison(t); });
      run_stage("train-attacker", [&] {
        stages.train_attacker(t, poisoned);
        return 0;
      });
      outcome.reports.push_back(run_stage("eval", [&] { return stages.evaluate(t); }));
    }
    outcome.summary = summarize(outcome.reports);
    std::string summary;
    for (const auto& [k, v] : outcome.summary) summary += k + '=' + v + '\n';
    write_file_atomic(outcome.dir / "summary.txt", summary);
    outcomes.push_back(std::move(outcome));
  }
  manifest += cfg.canonical_text();
  write_file_atomic(root / "manifest.txt", manifest);
  return outcomes;
}

}  // namespace cwfd
