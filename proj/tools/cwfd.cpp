// cwfd: command-line driver for the backdoor defense pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "cwfd/experiment.hpp"
#include "cwfd/synth.hpp"
#include "cwfd/util.hpp"

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> key_flags;
  unsigned jobs = 0;
  std::optional<int> target;
};

void add_common(CLI::App* cmd, Common& c, bool with_target) {
  cmd->add_option("-c,--config", c.config_path, "Experiment config file");
  cmd->add_option("--set", c.overrides, "Override section.key=value (repeatable)");
  cmd->add_option("-j,--jobs", c.jobs, "Worker thread cap");
  const auto defaults = cwfd::ExperimentConfig::defaults();
  for (const auto& [key, value] : defaults.values()) {
    cmd->add_option("--" + key, c.key_flags[key], "default: " + value);
  }
  if (with_target) cmd->add_option("-t,--target", c.target, "Target label (default: poison.target)");
}

cwfd::ExperimentConfig build_config(const Common& c) {
  auto cfg = c.config_path.empty() ? cwfd::ExperimentConfig::defaults() : cwfd::ExperimentConfig::load(c.config_path);
  for (const auto& o : c.overrides) cfg.apply_override(o);
  for (const auto& [key, value] : c.key_flags) {
    if (!value.empty()) cfg.set(key, value);
  }
  if (c.jobs > 0) cfg.set("run.jobs", std::to_string(c.jobs));
  return cfg;
}

int resolve_target(const Common& c, const cwfd::Settings& s) {
  if (c.target) return *c.target;
  try {
    return std::stoi(s.target);
  } catch (const std::exception&) {
    throw std::invalid_argument("poison.target is '" + s.target + "'; pass --target for a single stage");
  }
}

template <typename F>
auto stage(const char* name, F&& f) {
  return cwfd::run_stage(name, std::forward<F>(f));
}

void print_report(const cwfd::EvalReport& r) { std::cout << r.to_text(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Backdoor-learning website fingerprinting defense lab"};
  app.require_subcommand(1);

  Common common;
  auto* run = app.add_subcommand("run", "Full pipeline for every sweep point and target");
  add_common(run, common, false);
  auto* ingest = app.add_subcommand("ingest", "Load the dataset and write the split");
  add_common(ingest, common, false);
  auto* static_opt = app.add_subcommand("static-opt", "Optimize static trigger plans");
  add_common(static_opt, common, true);
  std::string trace_path;
  static_opt->add_option("--trace", trace_path, "Single trace file; prints its plan");
  auto* train_trigger = app.add_subcommand("train-trigger", "Train the dynamic burst predictor");
  add_common(train_trigger, common, false);
  auto* poison = app.add_subcommand("poison", "Poison the training split");
  add_common(poison, common, true);
  auto* train_attacker = app.add_subcommand("train-attacker", "Train poisoned and control classifiers");
  add_common(train_attacker, common, true);
  auto* eval = app.add_subcommand("eval", "Evaluate on the test split");
  add_common(eval, common, true);
  auto* report = app.add_subcommand("report", "Summarize per-target reports");
  add_common(report, common, false);

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  cwfd::SynthConfig synth_cfg;
  std::string synth_out;
  synth->add_option("output", synth_out, "Output directory")->required();
  synth->add_option("--classes", synth_cfg.classes);
  synth->add_option("--per-class", synth_cfg.per_class);
  synth->add_option("--unmonitored", synth_cfg.unmonitored);
  synth->add_option("--seed", synth_cfg.seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      cwfd::save_dataset(cwfd::make_synthetic_corpus(synth_cfg), synth_out);
      return 0;
    }
    const auto cfg = stage("config", [&] { return build_config(common); });
    const auto settings = stage("config", [&] { return cwfd::Settings::from(cfg); });

    if (run->parsed()) {
      const auto outcomes = cwfd::run_experiment(cfg);
      for (const auto& o : outcomes) {
        std::cout << "# " << o.dir.string() << '\n';
        for (const auto& [k, v] : o.summary) std::cout << k << '=' << v << '\n';
      }
      return 0;
    }

    cwfd::Stages stages(settings, cwfd::output_root(settings) / cfg.hash_hex());
    stage("ingest", [&] { return stages.ingest().size(); });
    if (ingest->parsed()) {
      std::cout << "traces=" << stages.ingest().size() << "\nclasses=" << stages.ingest().class_count << '\n';
    } else if (static_opt->parsed()) {
      stage("static-opt", [&] {
        const int target = resolve_target(common, settings);
        auto pcfg = stages.poison_config(target);
        const auto budget = stages.train_budget();
        auto src = stages.trigger_source();
        if (!trace_path.empty()) {
          const auto x = cwfd::parse_trace(cwfd::read_file(trace_path), trace_path);
          std::cout << cwfd::make_trigger(x, 0, budget, 1, pcfg, src).to_string() << '\n';
          return 0;
        }
        const auto train = cwfd::select_split(stages.ingest(), cwfd::Split::kTrain);
        std::vector<std::string> lines(train.size());
        cwfd::parallel_for(train.size(), settings.jobs, [&](std::size_t i) {
          auto one = src;
          one.jobs = 1;
          lines[i] = train.entries[i].name + '\t' +
                     cwfd::make_trigger(train.entries[i].trace, i, budget, 1, pcfg, one).to_string() + '\n';
        });
        std::string text;
        for (const auto& l : lines) text += l;
        cwfd::write_file_atomic(stages.dir() / "static_plans.txt", text);
        return 0;
      });
    } else if (train_trigger->parsed()) {
      stage("train-trigger", [&] {
        if (!stages.train_trigger()) throw std::invalid_argument("trigger.type is not dynamic");
        return 0;
      });
    } else if (poison->parsed()) {
      stage("poison", [&] {
        const auto r = stages.poison(resolve_target(common, settings));
        std::cout << "poisoned=" << r.poisoned_indices.size() << '\n';
        return 0;
      });
    } else if (train_attacker->parsed()) {
      stage("train-attacker", [&] {
        const int target = resolve_target(common, settings);
        stages.train_attacker(target, stages.load_poisoned(target));
        return 0;
      });
    } else if (eval->parsed()) {
      stage("eval", [&] {
        print_report(stages.evaluate(resolve_target(common, settings)));
        return 0;
      });
    } else if (report->parsed()) {
      stage("report", [&] {
        std::vector<cwfd::EvalReport> reports;
        const int classes = stages.ingest().class_count - (settings.world == cwfd::WorldMode::kOpen ? 1 : 0);
        for (int t : cwfd::resolve_targets(settings.target, classes, settings.seed)) {
          reports.push_back(stages.evaluate(t));
        }
        std::string text;
        for (const auto& [k, v] : cwfd::summarize(reports)) text += k + '=' + v + '\n';
        cwfd::write_file_atomic(stages.dir() / "summary.txt", text);
        std::cout << text;
        return 0;
      });
    }
  } catch (const cwfd::StageFailure& e) {
    std::cerr << "cwfd: stage " << e.stage() << " failed: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "cwfd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
