#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "avam/config.hpp"
#include "avam/io.hpp"

namespace avam {

namespace fs = std::filesystem;

/// Hash of the sections that shape a demo (task, env, demo); train refuses
/// demos generated under a different one.
std::uint64_t demo_config_hash(const RunConfig& cfg);

struct GenDemosResult {
  int written = 0;
  std::vector<std::string> failures;  // one message per demo that could not be produced
};

/// Writes demo_NNN.jsonl files and manifest.json into `out_dir`.
GenDemosResult cmd_gen_demos(const RunConfig& cfg, const fs::path& out_dir);

struct IngestResult {
  std::size_t raw = 0;
  std::size_t augmented = 0;
};

/// Keyframes every demo listed in the manifest and loads its raw (and, with
/// aug on, augmented) transitions into the trainer's demo partition.
IngestResult ingest_demos(const RunConfig& cfg, const fs::path& demo_dir, Trainer& trainer);

struct TrainResult {
  IngestResult ingest;
  fs::path checkpoint;
  fs::path log;
};

/// Writes checkpoint.bin, training.csv and config.json into `out_dir`.
/// An empty `demo_dir` trains without demos.
TrainResult cmd_train(const RunConfig& cfg, const fs::path& demo_dir, const fs::path& out_dir,
                      const std::function<void(const TrainingRow&)>& on_row = {});

std::string policy_name(PolicyKind kind);

struct EvalResult {
  MetricsReport report;
  fs::path log;
  fs::path report_csv;
};

/// Runs `episodes` episodes (epsilon 0) and writes episodes_<policy>.jsonl
/// and report_<policy>.csv into `out_dir`. Throws ConfigError when the
/// checkpoint was trained under a different config.
EvalResult cmd_eval(const fs::path& checkpoint, const RunConfig& cfg, int episodes,
                    PolicyKind policy, const fs::path& out_dir);

/// Recomputes one report row per policy label from episode logs.
std::vector<std::pair<std::string, MetricsReport>> cmd_metrics(const std::vector<fs::path>& logs);

/// Human-readable summary of a config, manifest, demo, episode log or checkpoint.
void cmd_inspect(const fs::path& path, std::ostream& out);

}  // namespace avam
