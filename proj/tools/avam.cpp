#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "avam/commands.hpp"

extern char** environ;

namespace {

using namespace avam;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> ablate;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "JSON run config (defaults when omitted)");
  cmd->add_option("--seed", o.seed, "Overrides the config seed");
  cmd->add_option("--ablate", o.ablate, "Turn off a toggle: align, aug or aux (repeatable)")
      ->check(CLI::IsMember({"align", "aug", "aux"}));
}

RunConfig resolve(const CommonOptions& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  cfg = apply_env_overrides(cfg, environ);
  if (o.seed) cfg.seed = *o.seed;
  for (const auto& a : o.ablate) {
    if (a == "align") cfg.toggles.align = false;
    if (a == "aug") cfg.toggles.aug = false;
    if (a == "aux") cfg.toggles.aux = false;
  }
  cfg.validate();
  return cfg;
}

void print_report(std::ostream& out, const std::vector<std::pair<std::string, MetricsReport>>& rows) {
  write_report_header(out);
  for (const auto& [policy, r] : rows) write_report_row(out, policy, r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active-vision dual-agent trainer and evaluator"};
  app.require_subcommand(1);

  CommonOptions gen_opts;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-demos", "Generate scripted demonstrations");
  add_common(gen, gen_opts);
  gen->add_option("--out", gen_out, "Output directory")->required();

  CommonOptions train_opts;
  std::string train_demos;
  std::string train_out;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train the dual agent");
  add_common(train, train_opts);
  train->add_option("--demos", train_demos, "Demo directory from gen-demos");
  train->add_option("--out", train_out, "Output directory")->required();
  train->add_flag("--quiet", quiet, "No progress lines");

  CommonOptions eval_opts;
  std::string eval_ckpt;
  std::string eval_out;
  std::optional<int> episodes;
  std::string baseline;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval, eval_opts);
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint from train")->required();
  eval->add_option("--episodes", episodes, "Episode count (config eval.episodes by default)")
      ->check(CLI::PositiveNumber);
  eval->add_option("--baseline", baseline, "Replace the NBV policy")
      ->check(CLI::IsMember({"random-view", "static-camera"}));
  eval->add_option("--out", eval_out, "Output directory")->required();

  std::vector<std::string> logs;
  std::string metrics_out;
  auto* metrics = app.add_subcommand("metrics", "Recompute metrics from episode logs");
  metrics->add_option("logs", logs, "Episode JSONL logs")->required();
  metrics->add_option("--out", metrics_out, "CSV path (stdout when omitted)");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "Summarize a config, demo, log or checkpoint");
  inspect->add_option("path", inspect_path, "File to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      const RunConfig cfg = resolve(gen_opts);
      const GenDemosResult r = cmd_gen_demos(cfg, gen_out);
      for (const auto& f : r.failures) std::cerr << "warning: " << f << '\n';
      std::cout << "wrote " << r.written << " demos to " << gen_out << '\n';
    } else if (train->parsed()) {
      const RunConfig cfg = resolve(train_opts);
      const int every = std::max(1, cfg.trainer.updates / 20);
      const TrainResult r = cmd_train(cfg, train_demos, train_out, [&](const TrainingRow& row) {
        if (quiet || row.update % every != 0) return;
        std::cout << "update " << row.update << " loss " << row.loss << " eps " << row.epsilon
                  << " episodes " << row.episodes << " successes " << row.successes << std::endl;
      });
      std::cout << "demo transitions: " << r.ingest.raw << " raw, " << r.ingest.augmented
                << " augmented\ncheckpoint " << r.checkpoint.string() << "\nlog "
                << r.log.string() << '\n';
    } else if (eval->parsed()) {
      const RunConfig cfg = resolve(eval_opts);
      PolicyKind kind = PolicyKind::kGreedy;
      if (baseline == "random-view") kind = PolicyKind::kRandomView;
      if (baseline == "static-camera") kind = PolicyKind::kStaticCamera;
      const EvalResult r =
          cmd_eval(eval_ckpt, cfg, episodes.value_or(cfg.eval.episodes), kind, eval_out);
      print_report(std::cout, {{policy_name(kind), r.report}});
    } else if (metrics->parsed()) {
      std::vector<fs::path> paths(logs.begin(), logs.end());
      const auto rows = cmd_metrics(paths);
      if (metrics_out.empty()) {
        print_report(std::cout, rows);
      } else {
        std::ofstream out(metrics_out);
        if (!out) throw std::runtime_error("cannot write " + metrics_out);
        print_report(out, rows);
      }
    } else if (inspect->parsed()) {
      cmd_inspect(inspect_path, std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
