#include "avam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace avam {

EpisodeRecord EpisodeRecord::from(const EpisodeOutcome& outcome, int max_steps) {
  EpisodeRecord r;
  r.outcome = outcome.kind;
  r.length = outcome.length;
  r.max_steps = max_steps;
  r.steps.reserve(outcome.steps.size());
  for (const auto& s : outcome.steps) {
    r.steps.push_back({s.entropy_before, s.entropy_after, s.entropy_initial, s.interaction});
  }
  return r;
}

void EpisodeRecord::validate() const {
  if (length != static_cast<int>(steps.size())) {
    throw std::invalid_argument("episode length " + std::to_string(length) + " but " +
                                std::to_string(steps.size()) + " step records");
  }
  if (max_steps < 1 || length > max_steps) {
    throw std::invalid_argument("episode length exceeds max_steps");
  }
  for (const auto& s : steps) {
    for (double e : {s.before, s.after, s.initial}) {
      if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("entropy outside [0, 1]");
    }
  }
}

namespace {

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / xs.size();
  double sq = 0.0;
  for (double x : xs) sq += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(sq / xs.size());
  return out;
}

template <typename Gain>
GainStats gain_stats(std::span<const EpisodeRecord> episodes, Gain gain) {
  GainStats out;
  if (episodes.empty()) return out;
  double total = 0.0;
  out.max = -std::numeric_limits<double>::infinity();
  for (const auto& ep : episodes) {
    double sum = 0.0;
    for (const auto& s : ep.steps) sum += gain(s);
    total += sum;
    out.max = std::max(out.max, sum);
  }
  out.avg = total / episodes.size();
  return out;
}

}  // namespace

GainStats assig(std::span<const EpisodeRecord> episodes) {
  return gain_stats(episodes, [](const StepEntropy& s) { return s.before - s.after; });
}

GainStats aiig(std::span<const EpisodeRecord> episodes) {
  return gain_stats(episodes, [](const StepEntropy& s) { return s.initial - s.after; });
}

MetricsReport episode_stats(std::span<const EpisodeRecord> episodes, bool movable_camera) {
  if (episodes.empty()) throw std::invalid_argument("episode_stats needs at least one episode");
  MetricsReport r;
  r.episodes = static_cast<int>(episodes.size());
  int success = 0;
  int timeout = 0;
  int failure = 0;
  std::vector<double> lengths;
  std::vector<double> first;
  std::vector<double> idle;
  for (const auto& ep : episodes) {
    ep.validate();
    switch (ep.outcome) {
      case OutcomeKind::kSuccess: ++success; break;
      case OutcomeKind::kTimeout: ++timeout; break;
      case OutcomeKind::kExecutionFailure: ++failure; break;
    }
    lengths.push_back(ep.length);
    int fi = ep.max_steps;
    int ni = 0;
    for (int k = 0; k < static_cast<int>(ep.steps.size()); ++k) {
      if (ep.steps[k].interaction) {
        fi = std::min(fi, k + 1);
      } else {
        ++ni;
      }
    }
    first.push_back(fi);
    idle.push_back(ni);
  }
  const double n = r.episodes;
  r.sr = success / n;
  r.to = timeout / n;
  r.ef = failure / n;
  r.el = mean_std(lengths);
  r.fi = mean_std(first);
  r.ni = mean_std(idle);
  r.assig = assig(episodes);
  if (movable_camera) r.aiig = aiig(episodes);
  return r;
}

double tor(std::span<const std::vector<double>> keyframe_entropies) {
  if (keyframe_entropies.empty()) throw std::invalid_argument("tor needs at least one demo");
  double total = 0.0;
  for (const auto& demo : keyframe_entropies) {
    if (demo.empty()) throw std::invalid_argument("tor: demo without keyframes");
    for (double e : demo) total += e;
  }
  return total / keyframe_entropies.size();
}

Viewpoint top_down_viewpoint(const EnvConfig& cfg) {
  return Viewpoint::make(cfg.view_radius, 0.05, 0.0);
}

std::vector<double> keyframe_entropies(const EnvConfig& cfg, const DemoTrajectory& traj,
                                       const KeyframeSet& kfs, const ViewpointSource& source) {
  if (kfs.size() == 0) throw std::invalid_argument("tor: demo without keyframes");
  std::vector<double> out;
  for (const auto& kf : kfs.pairs()) {
    const Viewpoint v = source.fixed ? *source.fixed : traj.frames.at(kf.camera).viewpoint;
    const Vec3 center = traj.frames.at(kf.gripper).gripper.position;
    out.push_back(scene_roi_entropy(traj.scene, cfg, center, cfg.align ? v.phi : 0.0, v));
  }
  return out;
}

double tor(const EnvConfig& cfg, std::span<const DemoTrajectory> demos,
           std::span<const KeyframeSet> keyframes, const ViewpointSource& source) {
  if (demos.size() != keyframes.size()) {
    throw std::invalid_argument("tor: one keyframe set per demo required");
  }
  std::vector<std::vector<double>> per_demo;
  for (std::size_t l = 0; l < demos.size(); ++l) {
    per_demo.push_back(keyframe_entropies(cfg, demos[l], keyframes[l], source));
  }
  return tor(per_demo);
}

double relative_tor(double tor_viewpoint, double tor_oracle) {
  if (tor_oracle == 0.0) throw std::domain_error("relative TOR undefined: oracle TOR is zero");
  return tor_viewpoint / tor_oracle;
}

}  // namespace avam
