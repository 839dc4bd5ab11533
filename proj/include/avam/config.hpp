#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "avam/agent.hpp"
#include "avam/demo.hpp"
#include "avam/env.hpp"

namespace avam {

/// Bad configuration input; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DemoConfig {
  int count = 30;
  int augment_per_segment = 4;
  KeyframeThresholds thresholds;
};

struct EvalConfig {
  int episodes = 100;
};

struct Toggles {
  bool align = true;
  bool aug = true;
  bool aux = true;
  bool operator==(const Toggles&) const = default;
};

struct RunConfig {
  Task task = Task::kHiddenReach;
  std::uint64_t seed = 0;
  EnvConfig env;
  TrainerConfig trainer;
  DemoConfig demo;
  EvalConfig eval;
  Toggles toggles;

  /// Environment config with the align/aux toggles applied.
  EnvConfig effective_env() const;
  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys and wrong types throw ConfigError.
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);

/// Applies AVAM_* environment variables. AVAM_SEED and AVAM_TASK set the top
/// level fields; any other AVAM_A__B sets the JSON pointer /a/b (lowercased),
/// parsing the value as JSON and falling back to a string.
RunConfig apply_env_overrides(const RunConfig& cfg, char** envp);

/// FNV-1a over the canonical JSON without the seed and eval sections, so a
/// checkpoint can be evaluated under other seeds and episode counts.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace avam
