#pragma once

#include <cstdint>
#include <vector>

#include "avam/agent.hpp"
#include "avam/env.hpp"

namespace avam {

struct DemoFrame {
  int index = 0;
  Viewpoint viewpoint;
  GripperPose gripper;
};

/// Frames sampled at a fixed rate; observations are re-rendered from the
/// scene on replay.
struct DemoTrajectory {
  Task task = Task::kHiddenReach;
  std::uint64_t seed = 0;
  double rate_hz = 10.0;
  SceneSpec scene;
  std::vector<DemoFrame> frames;

  int size() const { return static_cast<int>(frames.size()); }
};

struct KeyframePair {
  int camera = 0;   // k_c
  int gripper = 0;  // k_g
  bool operator==(const KeyframePair&) const = default;
};

class KeyframeSet {
 public:
  KeyframeSet() = default;
  /// Throws std::invalid_argument unless
  /// 0 <= k_c_{j-1} <= k_g_{j-1} <= k_c_j <= k_g_j <= frame_count - 1.
  KeyframeSet(std::vector<KeyframePair> pairs, int frame_count);

  const std::vector<KeyframePair>& pairs() const { return pairs_; }
  int size() const { return static_cast<int>(pairs_.size()); }
  const KeyframePair& operator[](int j) const { return pairs_[j]; }
  /// k_g_{j-1}, with k_g_{-1} = 0 for the first segment.
  int segment_start(int j) const { return j == 0 ? 0 : pairs_[j - 1].gripper; }

 private:
  std::vector<KeyframePair> pairs_;
};

struct KeyframeThresholds {
  double eps_g = 1e-3;             // metres per frame
  double eps_v = deg2rad(1.0);     // radians per frame
  int stable_frames = 2;
};

/// Gripper keyframe i: the gripper has moved since the previous gripper
/// keyframe and is stationary at i (its displacement to the next frame, or
/// from the previous one at the last frame, is below eps_g), or the closure
/// changes at i. A trajectory whose gripper never moves and never changes
/// closure yields the single degenerate pair (0, 0). Viewpoint keyframe j:
/// the first frame after the camera starts moving within
/// [k_g_{j-1}, k_g_j] whose next `stable_frames` angular changes stay below
/// eps_v, clamped to k_g_j; k_g_{j-1} when the camera does not move.
/// Throws std::invalid_argument for an empty trajectory or a gripper that
/// moves without ever settling.
KeyframeSet discover_keyframes(const DemoTrajectory& traj, const KeyframeThresholds& th = {});

/// Great-circle angle between the viewing directions of two viewpoints.
double viewpoint_angle(const Viewpoint& a, const Viewpoint& b);

/// Env-level transition pair of one keyframe segment.
struct DemoTransition {
  int segment = 0;
  int start_frame = 0;  // frame supplying o_t
  int mid_frame = 0;    // frame supplying the NBP start gripper
  SceneObservation obs;
  CameraAction camera;
  RoiObservation roi;
  GripperAction gripper;
  SceneObservation next;
  RoiObservation next_roi;
  RewardBundle rewards;
  bool terminal = false;
  bool success = false;
};

/// Replays each segment j in `env`: T_v from the frame k_g_{j-1} to the
/// viewpoint at k_c_j, T_p from k_c_j to the gripper pose at k_g_j.
std::vector<DemoTransition> build_raw_transitions(Environment& env,
                                                  const DemoTrajectory& traj,
                                                  const KeyframeSet& kfs);

struct AugmentedIndices {
  int segment = 0;
  int start = 0;  // in [k_g_{j-1}, k_c_j]
  int mid = 0;    // in [k_c_j, k_g_j]
};

/// `count` inclusive-uniform draws per segment, deterministic in `seed`.
std::vector<AugmentedIndices> sample_augmented_indices(const KeyframeSet& kfs,
                                                       std::uint64_t seed, int count);

/// Transitions starting at the sampled frames and still targeting the
/// keyframe endpoints; rewards and terminal flags are those of the raw
/// transition of the same segment.
std::vector<DemoTransition> augment_transitions(Environment& env, const DemoTrajectory& traj,
                                                const KeyframeSet& kfs, std::uint64_t seed,
                                                int count);

/// Scripted expert: camera steps one bin per frame to the bin viewpoint that
/// sees the most target pixels, holds, then the gripper moves straight to the
/// goal and closes on the final frame. Throws std::runtime_error when no bin
/// sees the target.
DemoTrajectory scripted_demo(const EnvConfig& cfg, Task task, std::uint64_t seed,
                             int gripper_frames = 5, int hold_frames = 2);

Transition to_features(const DemoTransition& t, const EnvConfig& cfg);

}  // namespace avam
