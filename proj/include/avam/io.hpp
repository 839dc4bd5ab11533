#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "avam/agent.hpp"
#include "avam/demo.hpp"
#include "avam/metrics.hpp"

namespace avam {

inline constexpr int kLogFormat = 1;
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Malformed input file; carries the offending line when there is one.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& what);
  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

nlohmann::json scene_to_json(const SceneSpec& scene);
SceneSpec scene_from_json(const nlohmann::json& j);

struct DemoFile {
  std::string config_hash;
  int index = 0;
  DemoTrajectory traj;
  KeyframeSet keyframes;
};

/// Header, scene, one line per frame, then the keyframe pairs.
void write_demo(std::ostream& out, const DemoFile& demo);
DemoFile read_demo(std::istream& in, const std::string& source);

struct EpisodeLogHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string policy;
  int max_steps = 0;
  bool movable_camera = true;
};

struct LoggedEpisode {
  std::uint64_t episode_seed = 0;
  EpisodeOutcome outcome;
};

/// Header line, then per episode its step records followed by an episode
/// record. Doubles are written in shortest round-trip form.
void write_episode_log(std::ostream& out, const EpisodeLogHeader& header,
                       const std::vector<LoggedEpisode>& episodes);

struct ParsedLog {
  EpisodeLogHeader header;
  std::vector<EpisodeRecord> episodes;
};

/// Reads one or more concatenated logs; every header starts a new section.
std::vector<ParsedLog> read_episode_logs(std::istream& in, const std::string& source);

const std::vector<std::string>& report_columns();
void write_report_header(std::ostream& out);
void write_report_row(std::ostream& out, const std::string& policy, const MetricsReport& r);

void write_training_header(std::ostream& out);
void write_training_row(std::ostream& out, const TrainingRow& row);

struct Checkpoint {
  std::uint64_t config_hash = 0;
  DualAgent agent;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws ParseError on a bad magic, version or truncated file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace avam
