#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "avam/geometry.hpp"
#include "avam/reward.hpp"
#include "avam/scene.hpp"
#include "avam/voxel.hpp"

namespace avam {

enum class Task { kHiddenReach, kHiddenPress };

std::string to_string(Task task);
/// Throws std::invalid_argument for unknown names.
Task task_from_string(const std::string& name);

struct EnvConfig {
  Aabb workspace{Vec3(-0.4, -0.4, 0.0), Vec3(0.4, 0.4, 0.5)};
  Vec3 hemisphere_center = Vec3::Zero();
  GridSpec scene_grid{Vec3(0.0, 0.0, 0.375), 0.05, 16};
  double roi_side = 0.2;
  int roi_dims = 16;
  ImageSpec image;
  std::vector<double> theta_bins_deg{15.0, 35.0, 55.0, 75.0};
  int phi_bins = 12;
  double view_radius = kDefaultViewRadius;
  double initial_theta_deg = 55.0;
  double initial_phi_deg = 0.0;
  int roi_lattice = 8;
  int translation_lattice = 8;
  int yaw_bins = 8;
  int max_steps = 10;
  double goal_tolerance = 0.025;
  Vec3 gripper_home = Vec3(0.0, 0.0, 0.4);
  double gripper_open = 0.08;
  double entropy_gain = 1.0;
  bool align = true;  // viewpoint-centric voxel alignment
  bool aux = true;    // auxiliary rewards r_i and r_e
  bool record_initial_view_entropy = true;
  Exec exec = Exec::kParallel;  // kernels used for rendering and labeling

  ViewpointBins view_bins() const;
  Viewpoint initial_viewpoint() const;
  GridSpec roi_grid(const Vec3& center) const;
  /// Coarse ROI-center lattice over the workspace, in the aligned frame.
  Lattice3 roi_centers() const;
  Lattice3 translations(const Vec3& roi_center) const;
  GripperPose home_pose() const;
};

struct CameraAction {
  int view_bin = 0;
  int roi_bin = 0;
  bool operator==(const CameraAction&) const = default;
};

struct GripperAction {
  int translation_bin = 0;
  int yaw_bin = 0;
  bool closed = false;
  bool operator==(const GripperAction&) const = default;
};

/// NBV input: the aligned scene grid plus proprioception.
struct SceneObservation {
  VoxelGrid grid;
  Viewpoint viewpoint;
  GripperPose gripper;
  double frame_phi = 0.0;  // azimuth of the aligned frame {L}; 0 without alignment
};

/// NBP input: the aligned ROI grid plus proprioception. `labels` are the
/// visibility labels of the ROI's ground-truth occupancy from `viewpoint`.
struct RoiObservation {
  VoxelGrid grid;
  std::vector<Visibility> labels;
  Viewpoint viewpoint;
  GripperPose gripper;
  double frame_phi = 0.0;
  Vec3 roi_center_world = Vec3::Zero();
};

enum class OutcomeKind { kSuccess, kTimeout, kExecutionFailure };
std::string to_string(OutcomeKind kind);
OutcomeKind outcome_from_string(const std::string& s);

struct StepRecord {
  double entropy_before = 0.0;    // E_t: ROI from the pre-move viewpoint
  double entropy_after = 0.0;     // E_t': ROI from the post-move viewpoint
  double entropy_initial = 0.0;   // ROI from the episode's initial viewpoint
  RoiStatus status = RoiStatus::kReachableEmpty;
  bool interaction = false;
  RewardBundle rewards;
  CameraAction camera;
  GripperAction gripper;
};

struct EpisodeOutcome {
  OutcomeKind kind = OutcomeKind::kTimeout;
  int length = 0;
  std::vector<StepRecord> steps;
};

struct CameraStepResult {
  RoiObservation observation;
  RoiStatus status = RoiStatus::kReachableEmpty;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  double entropy_initial = 0.0;
};

struct GripperStepResult {
  SceneObservation next;
  RoiObservation next_roi;
  RewardBundle rewards;
  bool done = false;
  bool terminal = false;  // every outcome, timeouts included, ends the return
  bool interaction = false;
  std::optional<EpisodeOutcome> outcome;
};

struct EnvState {
  Viewpoint viewpoint;
  GripperPose gripper;
  int step = 0;
};

/// Builds the randomized scene for a task. Retries internally until the
/// target is hidden from the initial viewpoint (target-ROI entropy > 0.5),
/// visible from some bin viewpoint, and reachable on a straight line from
/// the gripper home pose.
SceneSpec generate_scene(Task task, std::uint64_t seed, const EnvConfig& cfg);

/// Entropy of the ROI cube centered at `roi_center_world`, with the ground
/// truth occupancy voxelized in the frame rotated by `frame_phi`, seen from `v`.
double scene_roi_entropy(const SceneSpec& scene, const EnvConfig& cfg,
                         const Vec3& roi_center_world, double frame_phi,
                         const Viewpoint& v);

/// Number of pixels whose first hit is the target when viewed from `v`;
/// counting stops once `limit` is reached.
int target_pixels(const SceneSpec& scene, const EnvConfig& cfg, const Viewpoint& v,
                  int limit = std::numeric_limits<int>::max());

/// Deterministic tabletop simulator with the camera/gripper sub-step split.
/// One instance is single-threaded; run independent instances in parallel.
class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  const EnvConfig& config() const { return cfg_; }
  const ViewpointBins& view_bins() const { return bins_; }
  const SceneSpec& scene() const { return scene_; }
  const EnvState& state() const { return state_; }
  const std::vector<StepRecord>& records() const { return records_; }
  bool episode_active() const { return active_; }

  SceneObservation reset(Task task, std::uint64_t seed);
  SceneObservation reset(SceneSpec scene);

  /// Puts the episode in a given state awaiting a camera sub-step.
  SceneObservation restore(SceneSpec scene, const EnvState& state);

  CameraStepResult step_camera(const CameraAction& action);
  GripperStepResult step_gripper(const GripperAction& action);

  /// Replaces the gripper pose between the two sub-steps (demo replay of
  /// augmented transitions, whose NBP start frame is mid-motion).
  RoiObservation override_gripper(const GripperPose& pose);

  /// Aligned frame azimuth for a viewpoint under the current config.
  double frame_phi_for(const Viewpoint& v) const { return cfg_.align ? v.phi : 0.0; }

  Viewpoint decode_view(int view_bin, double frame_phi) const;
  Vec3 decode_roi_center(int roi_bin, double frame_phi) const;
  GripperPose decode_gripper(const GripperAction& action, const Vec3& roi_center_world,
                             double frame_phi) const;

  /// Inverse of the decoders: nearest discrete action reaching the targets.
  CameraAction encode_camera(const Viewpoint& target, const Vec3& roi_center_world,
                             double frame_phi) const;
  GripperAction encode_gripper(const GripperPose& target, const Vec3& roi_center_world,
                               double frame_phi) const;

  /// Scene observation of an arbitrary (viewpoint, gripper) pair of the
  /// current scene, without touching the episode state.
  SceneObservation observe_scene(const Viewpoint& v, const GripperPose& g) const;
  RoiObservation observe_roi(const Viewpoint& v, const GripperPose& g,
                             const Vec3& roi_center_world) const;

 private:
  enum class Phase { kAwaitCamera, kAwaitGripper, kDone };

  SceneObservation begin_episode();
  SceneObservation scene_observation(const PointCloud& world_cloud) const;
  RoiObservation roi_observation(const PointCloud& world_cloud, const Vec3& roi_center_world,
                                 const VoxelGrid& truth, double frame_phi) const;

  EnvConfig cfg_;
  ViewpointBins bins_;
  SceneSpec scene_;
  EnvState state_;
  Viewpoint initial_view_;
  Phase phase_ = Phase::kDone;
  bool active_ = false;
  PointCloud cloud_;  // world-frame cloud from the current viewpoint
  RoiObservation roi_;
  VoxelGrid roi_truth_;
  StepRecord pending_;
  std::vector<StepRecord> records_;
};

}  // namespace avam
