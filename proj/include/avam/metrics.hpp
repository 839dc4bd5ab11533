#pragma once

#include <optional>
#include <span>
#include <vector>

#include "avam/demo.hpp"
#include "avam/env.hpp"

namespace avam {

struct StepEntropy {
  double before = 0.0;   // E_t
  double after = 0.0;    // E_t'
  double initial = 0.0;  // ROI entropy from the initial viewpoint
  bool interaction = false;
};

struct EpisodeRecord {
  OutcomeKind outcome = OutcomeKind::kTimeout;
  int length = 0;
  int max_steps = 0;
  std::vector<StepEntropy> steps;

  static EpisodeRecord from(const EpisodeOutcome& outcome, int max_steps);
  /// Throws std::invalid_argument if the length disagrees with the steps or
  /// an entropy leaves [0, 1].
  void validate() const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct GainStats {
  double avg = 0.0;
  double max = 0.0;  // largest per-episode sum
};

struct MetricsReport {
  int episodes = 0;
  double sr = 0.0;
  MeanStd el;
  double to = 0.0;
  double ef = 0.0;
  MeanStd fi;
  MeanStd ni;
  GainStats assig;
  std::optional<GainStats> aiig;  // absent for cameras that cannot move freely
};

/// Per-episode sums of E_t - E_t', averaged over episodes.
GainStats assig(std::span<const EpisodeRecord> episodes);
/// Per-episode sums of (initial-view entropy - E_t'), averaged over episodes.
GainStats aiig(std::span<const EpisodeRecord> episodes);

/// FI is the 1-based index of the first interactive step, max_steps for
/// episodes without one. Throws std::invalid_argument for no episodes.
MetricsReport episode_stats(std::span<const EpisodeRecord> episodes, bool movable_camera = true);

/// Mean over demos of the summed per-keyframe ROI entropies.
/// Throws std::invalid_argument for no demos or a demo without keyframes.
double tor(std::span<const std::vector<double>> keyframe_entropies);

/// Either one fixed viewpoint for every keyframe, or the demo's own
/// viewpoint at each camera keyframe.
struct ViewpointSource {
  std::optional<Viewpoint> fixed;

  static ViewpointSource oracle() { return {}; }
  static ViewpointSource fixed_view(const Viewpoint& v) { return {v}; }
};

/// Near-vertical view above the hemisphere center.
Viewpoint top_down_viewpoint(const EnvConfig& cfg);

/// ROI entropy at each keyframe pair: ROI centered on the gripper pose at
/// k_g, seen from the source viewpoint.
std::vector<double> keyframe_entropies(const EnvConfig& cfg, const DemoTrajectory& traj,
                                       const KeyframeSet& kfs, const ViewpointSource& source);

double tor(const EnvConfig& cfg, std::span<const DemoTrajectory> demos,
           std::span<const KeyframeSet> keyframes, const ViewpointSource& source);

/// Throws std::domain_error when the oracle TOR is zero.
double relative_tor(double tor_viewpoint, double tor_oracle);

}  // namespace avam
