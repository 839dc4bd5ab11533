#include "avam/env.hpp"

#include <cmath>
#include <stdexcept>

#include "avam/kernels.hpp"

namespace avam {

std::string to_string(Task task) {
  switch (task) {
    case Task::kHiddenReach: return "hidden-reach";
    case Task::kHiddenPress: return "hidden-press";
  }
  return "hidden-reach";
}

Task task_from_string(const std::string& name) {
  if (name == "hidden-reach") return Task::kHiddenReach;
  if (name == "hidden-press") return Task::kHiddenPress;
  throw std::invalid_argument("unknown task: " + name);
}

std::string to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kSuccess: return "success";
    case OutcomeKind::kTimeout: return "timeout";
    case OutcomeKind::kExecutionFailure: return "execution-failure";
  }
  return "timeout";
}

OutcomeKind outcome_from_string(const std::string& s) {
  if (s == "success") return OutcomeKind::kSuccess;
  if (s == "timeout") return OutcomeKind::kTimeout;
  if (s == "execution-failure") return OutcomeKind::kExecutionFailure;
  throw std::invalid_argument("unknown outcome: " + s);
}

ViewpointBins EnvConfig::view_bins() const {
  std::vector<double> thetas;
  for (double t : theta_bins_deg) thetas.push_back(deg2rad(t));
  return ViewpointBins(thetas, phi_bins, view_radius);
}

Viewpoint EnvConfig::initial_viewpoint() const {
  return Viewpoint::make(view_radius, deg2rad(initial_theta_deg), deg2rad(initial_phi_deg));
}

GridSpec EnvConfig::roi_grid(const Vec3& center) const {
  return GridSpec{center, roi_side / roi_dims, roi_dims};
}

Lattice3 EnvConfig::roi_centers() const {
  return Lattice3(workspace.lo, workspace.hi, roi_lattice);
}

Lattice3 EnvConfig::translations(const Vec3& roi_center) const {
  const Vec3 half = Vec3::Constant(0.5 * roi_side);
  return Lattice3(roi_center - half, roi_center + half, translation_lattice);
}

GripperPose EnvConfig::home_pose() const {
  GripperPose g;
  g.position = gripper_home;
  g.closure = gripper_open;
  return g;
}

namespace {

PointCloud capture(const SceneSpec& scene, const EnvConfig& cfg, const Viewpoint& v) {
  const CameraPose cam = viewpoint_to_camera_pose(v, scene.hemisphere_center);
  return depth_to_pointcloud(render_depth(scene, cam, cfg.image, cfg.exec), cam, cfg.image);
}

PointCloud align_cloud(const PointCloud& pc, double phi) {
  PointCloud out;
  out.positions = align_points(pc.positions, phi);
  out.features = pc.features;
  return out;
}

VoxelGrid roi_truth(const SceneSpec& scene, const EnvConfig& cfg, const Vec3& roi_center_world,
                    const AzimuthRotation& rot) {
  VoxelGrid truth(cfg.roi_grid(rot.to_local(roi_center_world)));
  kernels::solid_occupancy(scene, rot, truth, cfg.exec);
  return truth;
}

// Ground-truth ROI labels from viewpoint v: DDA through the ROI's own solid
// voxels plus any scene solid crossing the sight line before it enters the ROI.
std::vector<Visibility> truth_labels(const SceneSpec& scene, const EnvConfig& cfg,
                                     const VoxelGrid& truth, const AzimuthRotation& rot,
                                     const Viewpoint& v) {
  const CameraPose cam = viewpoint_to_camera_pose(v, scene.hemisphere_center);
  ObservedGrid obs = label_visibility(truth, rot.to_local(cam.position), cfg.exec);
  std::vector<std::uint8_t> blocked(truth.size(), 0);
  kernels::external_occlusion(scene, rot, truth, cam.position, blocked, cfg.exec);
  for (std::size_t i = 0; i < blocked.size(); ++i) {
    if (blocked[i]) obs.labels[i] = Visibility::kOccluded;
  }
  return std::move(obs.labels);
}

bool inside_any_solid(const SceneSpec& scene, const Vec3& p) {
  for (const auto& s : scene.solids) {
    if (s.box.contains(p)) return true;
  }
  return false;
}

void check_config(const EnvConfig& cfg) {
  if (cfg.hemisphere_center.x() != 0.0 || cfg.hemisphere_center.y() != 0.0) {
    throw std::invalid_argument("hemisphere center must lie on the z axis");
  }
  if (cfg.max_steps < 1 || cfg.roi_lattice < 1 || cfg.translation_lattice < 1 ||
      cfg.yaw_bins < 1 || cfg.roi_dims < 1 || !(cfg.roi_side > 0.0)) {
    throw std::invalid_argument("environment sizes must be positive");
  }
}

}  // namespace

double scene_roi_entropy(const SceneSpec& scene, const EnvConfig& cfg,
                         const Vec3& roi_center_world, double frame_phi,
                         const Viewpoint& v) {
  const AzimuthRotation rot(frame_phi);
  const VoxelGrid truth = roi_truth(scene, cfg, roi_center_world, rot);
  return roi_entropy(truth_labels(scene, cfg, truth, rot, v));
}

int target_pixels(const SceneSpec& scene, const EnvConfig& cfg, const Viewpoint& v,
                  int limit) {
  const CameraPose cam = viewpoint_to_camera_pose(v, scene.hemisphere_center);
  const int target = scene.target_index();
  int count = 0;
  for (int row = 0; row < cfg.image.height; ++row) {
    for (int col = 0; col < cfg.image.width; ++col) {
      const auto hit = kernels::first_hit(scene, cam.position, pixel_ray(cam, cfg.image, col, row));
      count += hit.solid == target;
      if (count >= limit) return count;
    }
  }
  return count;
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)), bins_(cfg_.view_bins()) {
  check_config(cfg_);
}

SceneObservation Environment::reset(Task task, std::uint64_t seed) {
  return reset(generate_scene(task, seed, cfg_));
}

SceneObservation Environment::reset(SceneSpec scene) {
  EnvState s;
  s.viewpoint = cfg_.initial_viewpoint();
  s.gripper = cfg_.home_pose();
  return restore(std::move(scene), s);
}

SceneObservation Environment::restore(SceneSpec scene, const EnvState& state) {
  scene.validate();
  if (state.step < 0 || state.step >= cfg_.max_steps) {
    throw std::invalid_argument("restored step counter out of range");
  }
  scene_ = std::move(scene);
  state_ = state;
  initial_view_ = cfg_.initial_viewpoint();
  records_.clear();
  return begin_episode();
}

SceneObservation Environment::begin_episode() {
  cloud_ = capture(scene_, cfg_, state_.viewpoint);
  phase_ = Phase::kAwaitCamera;
  active_ = true;
  return scene_observation(cloud_);
}

SceneObservation Environment::scene_observation(const PointCloud& world_cloud) const {
  SceneObservation obs;
  obs.frame_phi = frame_phi_for(state_.viewpoint);
  obs.grid = voxelize(align_cloud(world_cloud, obs.frame_phi), cfg_.scene_grid);
  obs.viewpoint = state_.viewpoint;
  obs.gripper = state_.gripper;
  return obs;
}

RoiObservation Environment::roi_observation(const PointCloud& world_cloud,
                                            const Vec3& roi_center_world,
                                            const VoxelGrid& truth, double frame_phi) const {
  const AzimuthRotation rot(frame_phi);
  RoiObservation obs;
  obs.frame_phi = frame_phi;
  obs.grid = crop_roi(align_cloud(world_cloud, frame_phi), rot.to_local(roi_center_world),
                      cfg_.roi_side, cfg_.roi_side / cfg_.roi_dims);
  obs.labels = truth_labels(scene_, cfg_, truth, rot, state_.viewpoint);
  obs.viewpoint = state_.viewpoint;
  obs.gripper = state_.gripper;
  obs.roi_center_world = roi_center_world;
  return obs;
}

Viewpoint Environment::decode_view(int view_bin, double frame_phi) const {
  const Viewpoint local = bins_.undiscretize(view_bin);
  return Viewpoint::make(local.r, local.theta, local.phi + frame_phi);
}

Vec3 Environment::decode_roi_center(int roi_bin, double frame_phi) const {
  return AzimuthRotation(frame_phi).to_world(cfg_.roi_centers().center(roi_bin));
}

GripperPose Environment::decode_gripper(const GripperAction& action,
                                        const Vec3& roi_center_world,
                                        double frame_phi) const {
  if (action.yaw_bin < 0 || action.yaw_bin >= cfg_.yaw_bins) {
    throw std::out_of_range("yaw bin index");
  }
  const AzimuthRotation rot(frame_phi);
  const Lattice3 lattice = cfg_.translations(rot.to_local(roi_center_world));
  GripperPose g;
  g.position = rot.to_world(lattice.center(action.translation_bin));
  g.orientation.z() = wrap_angle(action.yaw_bin * (kTwoPi / cfg_.yaw_bins) + frame_phi);
  g.closure = action.closed ? 0.0 : cfg_.gripper_open;
  return g;
}

CameraAction Environment::encode_camera(const Viewpoint& target, const Vec3& roi_center_world,
                                        double frame_phi) const {
  Viewpoint local = target;
  local.phi = wrap_angle(target.phi - frame_phi);
  CameraAction a;
  a.view_bin = bins_.discretize(local);
  a.roi_bin = cfg_.roi_centers().nearest(AzimuthRotation(frame_phi).to_local(roi_center_world));
  return a;
}

GripperAction Environment::encode_gripper(const GripperPose& target,
                                          const Vec3& roi_center_world,
                                          double frame_phi) const {
  const AzimuthRotation rot(frame_phi);
  const Lattice3 lattice = cfg_.translations(rot.to_local(roi_center_world));
  GripperAction a;
  a.translation_bin = lattice.nearest(rot.to_local(target.position));
  const double spacing = kTwoPi / cfg_.yaw_bins;
  a.yaw_bin = static_cast<int>(std::llround(wrap_angle(target.yaw() - frame_phi) / spacing)) %
              cfg_.yaw_bins;
  a.closed = target.closure < 0.5 * cfg_.gripper_open;
  return a;
}

SceneObservation Environment::observe_scene(const Viewpoint& v, const GripperPose& g) const {
  SceneObservation obs;
  obs.frame_phi = frame_phi_for(v);
  obs.grid = voxelize(align_cloud(capture(scene_, cfg_, v), obs.frame_phi), cfg_.scene_grid);
  obs.viewpoint = v;
  obs.gripper = g;
  return obs;
}

RoiObservation Environment::observe_roi(const Viewpoint& v, const GripperPose& g,
                                        const Vec3& roi_center_world) const {
  const double phi = frame_phi_for(v);
  const AzimuthRotation rot(phi);
  const VoxelGrid truth = roi_truth(scene_, cfg_, roi_center_world, rot);
  RoiObservation obs;
  obs.frame_phi = phi;
  obs.grid = crop_roi(align_cloud(capture(scene_, cfg_, v), phi), rot.to_local(roi_center_world),
                      cfg_.roi_side, cfg_.roi_side / cfg_.roi_dims);
  obs.labels = truth_labels(scene_, cfg_, truth, rot, v);
  obs.viewpoint = v;
  obs.gripper = g;
  obs.roi_center_world = roi_center_world;
  return obs;
}

CameraStepResult Environment::step_camera(const CameraAction& action) {
  if (phase_ != Phase::kAwaitCamera) {
    throw std::logic_error("step_camera requires an active episode awaiting a camera step");
  }
  const double phi_t = frame_phi_for(state_.viewpoint);
  const Viewpoint target = decode_view(action.view_bin, phi_t);
  const Vec3 f_world = decode_roi_center(action.roi_bin, phi_t);
  const Viewpoint before = state_.viewpoint;

  state_.viewpoint = target;
  cloud_ = capture(scene_, cfg_, target);
  const double phi = frame_phi_for(target);
  const AzimuthRotation rot(phi);
  roi_truth_ = roi_truth(scene_, cfg_, f_world, rot);
  roi_ = roi_observation(cloud_, f_world, roi_truth_, phi);

  CameraStepResult out;
  out.entropy_before = roi_entropy(truth_labels(scene_, cfg_, roi_truth_, rot, before));
  out.entropy_after = roi_entropy(roi_.labels);
  if (cfg_.record_initial_view_entropy) {
    out.entropy_initial = roi_entropy(truth_labels(scene_, cfg_, roi_truth_, rot, initial_view_));
  }
  if (!cfg_.workspace.contains(f_world) || inside_any_solid(scene_, f_world)) {
    out.status = RoiStatus::kUnreachable;
  } else {
    out.status = RoiStatus::kReachableEmpty;
    for (auto label : roi_.labels) {
      if (label == Visibility::kObservedOccupied) {
        out.status = RoiStatus::kReachableNonEmpty;
        break;
      }
    }
  }
  out.observation = roi_;

  pending_ = StepRecord{};
  pending_.entropy_before = out.entropy_before;
  pending_.entropy_after = out.entropy_after;
  pending_.entropy_initial = out.entropy_initial;
  pending_.status = out.status;
  pending_.camera = action;
  phase_ = Phase::kAwaitGripper;
  return out;
}

RoiObservation Environment::override_gripper(const GripperPose& pose) {
  if (phase_ != Phase::kAwaitGripper) {
    throw std::logic_error("override_gripper is only valid between the two sub-steps");
  }
  state_.gripper = pose;
  roi_.gripper = pose;
  return roi_;
}

GripperStepResult Environment::step_gripper(const GripperAction& action) {
  if (phase_ != Phase::kAwaitGripper) {
    throw std::logic_error("step_gripper requires a preceding step_camera");
  }
  const double phi = frame_phi_for(state_.viewpoint);
  const GripperPose goal = decode_gripper(action, roi_.roi_center_world, phi);

  // Straight-line sweep sampled at half the scene voxel size.
  const Vec3 p0 = state_.gripper.position;
  const Vec3 delta = goal.position - p0;
  const double spacing = 0.5 * cfg_.scene_grid.resolution;
  const int n = std::max(1, static_cast<int>(std::ceil(delta.norm() / spacing)));
  bool contact = false;
  bool collision = !cfg_.workspace.contains(goal.position);
  for (int i = 1; i <= n && !collision; ++i) {
    const Vec3 p = p0 + delta * (static_cast<double>(i) / n);
    for (const auto& s : scene_.solids) {
      if (!s.box.contains(p)) continue;
      contact = true;
      if (s.role != SolidRole::kTarget) collision = true;
    }
  }

  bool success = false;
  if (!collision) {
    state_.gripper = goal;
    const bool closed = goal.closure == 0.0;
    success = (goal.position - scene_.goal).norm() <= cfg_.goal_tolerance &&
              closed == scene_.goal_closed;
  }
  ++state_.step;

  StepRecord rec = pending_;
  rec.gripper = action;
  rec.interaction = contact;
  const double r_task = success ? 1.0 : 0.0;
  const double r_i = cfg_.aux ? interaction_reward(rec.status) : 0.0;
  const double r_e = cfg_.aux ? entropy_reduction_reward(rec.entropy_before, rec.entropy_after,
                                                         cfg_.entropy_gain)
                              : 0.0;
  rec.rewards = compose_rewards(r_task, r_i, r_e);
  records_.push_back(rec);

  GripperStepResult out;
  out.rewards = rec.rewards;
  out.interaction = contact;
  std::optional<OutcomeKind> kind;
  if (collision) {
    kind = OutcomeKind::kExecutionFailure;
  } else if (success) {
    kind = OutcomeKind::kSuccess;
  } else if (state_.step >= cfg_.max_steps) {
    kind = OutcomeKind::kTimeout;
  }
  out.done = kind.has_value();
  out.terminal = out.done;
  if (kind) {
    out.outcome = EpisodeOutcome{*kind, state_.step, records_};
    phase_ = Phase::kDone;
    active_ = false;
  } else {
    phase_ = Phase::kAwaitCamera;
  }
  roi_.gripper = state_.gripper;
  out.next = scene_observation(cloud_);
  out.next_roi = roi_;
  return out;
}

}  // namespace avam
