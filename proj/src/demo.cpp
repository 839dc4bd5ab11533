#include "avam/demo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace avam {

KeyframeSet::KeyframeSet(std::vector<KeyframePair> pairs, int frame_count)
    : pairs_(std::move(pairs)) {
  if (pairs_.empty()) throw std::invalid_argument("keyframe set is empty");
  int prev = 0;
  for (const auto& p : pairs_) {
    if (!(prev <= p.camera && p.camera <= p.gripper && p.gripper <= frame_count - 1)) {
      throw std::invalid_argument("keyframes violate the ordering chain at (" +
                                  std::to_string(p.camera) + ", " +
                                  std::to_string(p.gripper) + ")");
    }
    prev = p.gripper;
  }
}

double viewpoint_angle(const Viewpoint& a, const Viewpoint& b) {
  auto dir = [](const Viewpoint& v) {
    return Vec3(std::sin(v.theta) * std::cos(v.phi), std::sin(v.theta) * std::sin(v.phi),
                std::cos(v.theta));
  };
  return std::acos(std::clamp(dir(a).dot(dir(b)), -1.0, 1.0));
}

KeyframeSet discover_keyframes(const DemoTrajectory& traj, const KeyframeThresholds& th) {
  const int n = traj.size();
  if (n == 0) throw std::invalid_argument("empty demo trajectory");
  const auto& f = traj.frames;
  auto displacement = [&](int i, int j) {
    return (f[i].gripper.position - f[j].gripper.position).norm();
  };

  std::vector<int> gripper_kfs;
  bool moved = false;
  bool ever_moved = false;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && displacement(i, i - 1) >= th.eps_g) {
      moved = true;
      ever_moved = true;
    }
    const bool closure_change = i > 0 && f[i].gripper.closure != f[i - 1].gripper.closure;
    bool stationary = true;
    if (i + 1 < n) {
      stationary = displacement(i + 1, i) < th.eps_g;
    } else if (i > 0) {
      stationary = displacement(i, i - 1) < th.eps_g;
    }
    if ((moved && stationary) || closure_change) {
      gripper_kfs.push_back(i);
      moved = false;
    }
  }
  if (gripper_kfs.empty()) {
    if (ever_moved) throw std::invalid_argument("demo gripper never settles: no gripper keyframe");
    return KeyframeSet({{0, 0}}, n);
  }

  auto change = [&](int i) {
    return i + 1 < n ? viewpoint_angle(f[i].viewpoint, f[i + 1].viewpoint) : 0.0;
  };
  std::vector<KeyframePair> pairs;
  int start = 0;
  for (int kg : gripper_kfs) {
    int kc = start;
    int motion = -1;
    for (int i = start; i < kg; ++i) {
      if (change(i) >= th.eps_v) {
        motion = i;
        break;
      }
    }
    if (motion >= 0) {
      kc = kg;
      for (int i = motion + 1; i <= kg; ++i) {
        bool stable = true;
        for (int k = 0; k < th.stable_frames; ++k) stable = stable && change(i + k) < th.eps_v;
        if (stable) {
          kc = i;
          break;
        }
      }
    }
    pairs.push_back({kc, kg});
    start = kg;
  }
  return KeyframeSet(std::move(pairs), n);
}

namespace {

DemoTransition replay_segment(Environment& env, const DemoTrajectory& traj,
                              const KeyframeSet& kfs, int j, int start, int mid) {
  const DemoFrame& from = traj.frames.at(start);
  const Viewpoint& view_goal = traj.frames.at(kfs[j].camera).viewpoint;
  const GripperPose& grip_goal = traj.frames.at(kfs[j].gripper).gripper;

  DemoTransition t;
  t.segment = j;
  t.start_frame = start;
  t.mid_frame = mid;
  t.obs = env.restore(traj.scene, EnvState{from.viewpoint, from.gripper, j});
  t.camera = env.encode_camera(view_goal, grip_goal.position, t.obs.frame_phi);
  env.step_camera(t.camera);
  t.roi = env.override_gripper(traj.frames.at(mid).gripper);
  t.gripper = env.encode_gripper(grip_goal, t.roi.roi_center_world, t.roi.frame_phi);
  GripperStepResult step = env.step_gripper(t.gripper);
  t.next = std::move(step.next);
  t.next_roi = std::move(step.next_roi);
  t.rewards = step.rewards;
  t.terminal = step.terminal;
  t.success = step.outcome && step.outcome->kind == OutcomeKind::kSuccess;
  return t;
}

}  // namespace

std::vector<DemoTransition> build_raw_transitions(Environment& env,
                                                  const DemoTrajectory& traj,
                                                  const KeyframeSet& kfs) {
  std::vector<DemoTransition> out;
  for (int j = 0; j < kfs.size(); ++j) {
    out.push_back(replay_segment(env, traj, kfs, j, kfs.segment_start(j), kfs[j].camera));
  }
  return out;
}

std::vector<AugmentedIndices> sample_augmented_indices(const KeyframeSet& kfs,
                                                       std::uint64_t seed, int count) {
  if (count < 0) throw std::invalid_argument("augmentation count must be non-negative");
  std::mt19937_64 rng(seed);
  std::vector<AugmentedIndices> out;
  for (int j = 0; j < kfs.size(); ++j) {
    std::uniform_int_distribution<int> start(kfs.segment_start(j), kfs[j].camera);
    std::uniform_int_distribution<int> mid(kfs[j].camera, kfs[j].gripper);
    for (int k = 0; k < count; ++k) {
      const int s = start(rng);
      const int m = mid(rng);
      out.push_back({j, s, m});
    }
  }
  return out;
}

std::vector<DemoTransition> augment_transitions(Environment& env, const DemoTrajectory& traj,
                                                const KeyframeSet& kfs, std::uint64_t seed,
                                                int count) {
  const auto indices = sample_augmented_indices(kfs, seed, count);
  if (indices.empty()) return {};
  const auto raw = build_raw_transitions(env, traj, kfs);
  std::vector<DemoTransition> out;
  out.reserve(indices.size());
  for (const auto& idx : indices) {
    DemoTransition t = replay_segment(env, traj, kfs, idx.segment, idx.start, idx.mid);
    t.rewards = raw[idx.segment].rewards;
    t.terminal = raw[idx.segment].terminal;
    t.success = raw[idx.segment].success;
    out.push_back(std::move(t));
  }
  return out;
}

DemoTrajectory scripted_demo(const EnvConfig& cfg, Task task, std::uint64_t seed,
                             int gripper_frames, int hold_frames) {
  if (gripper_frames < 1 || hold_frames < 0) {
    throw std::invalid_argument("scripted demo needs at least one gripper frame");
  }
  DemoTrajectory traj;
  traj.task = task;
  traj.seed = seed;
  traj.scene = generate_scene(task, seed, cfg);

  const ViewpointBins bins = cfg.view_bins();
  int best = -1;
  int best_pixels = 0;
  for (int k = 0; k < bins.size(); ++k) {
    const int px = target_pixels(traj.scene, cfg, bins.undiscretize(k));
    if (px > best_pixels) {
      best_pixels = px;
      best = k;
    }
  }
  if (best < 0) throw std::runtime_error("scripted demo: target is not viewable from any bin");

  const int phis = bins.phi_count();
  int ti = bins.discretize(cfg.initial_viewpoint()) / phis;
  int pi = bins.discretize(cfg.initial_viewpoint()) % phis;
  const int tt = best / phis;
  const int pt = best % phis;
  GripperPose grip = cfg.home_pose();
  auto push = [&](const Viewpoint& v, const GripperPose& g) {
    traj.frames.push_back({traj.size(), v, g});
  };

  push(cfg.initial_viewpoint(), grip);
  while (ti != tt || pi != pt) {
    if (pi != pt) {
      const int ahead = ((pt - pi) % phis + phis) % phis;
      pi = ((ahead <= phis / 2 ? pi + 1 : pi - 1) + phis) % phis;
    }
    if (ti != tt) ti += ti < tt ? 1 : -1;
    push(bins.undiscretize(ti * phis + pi), grip);
  }
  const Viewpoint settled = traj.frames.back().viewpoint;
  for (int h = 0; h < hold_frames; ++h) push(settled, grip);

  const Vec3 from = grip.position;
  for (int k = 1; k <= gripper_frames; ++k) {
    GripperPose g = grip;
    g.position = from + (traj.scene.goal - from) * (static_cast<double>(k) / gripper_frames);
    if (k == gripper_frames) g.closure = traj.scene.goal_closed ? 0.0 : cfg.gripper_open;
    push(settled, g);
  }
  return traj;
}

Transition to_features(const DemoTransition& t, const EnvConfig& cfg) {
  Transition out;
  out.nbv = nbv_features(t.obs, cfg);
  out.nbp = nbp_features(t.roi, cfg);
  out.next_nbv = nbv_features(t.next, cfg);
  out.next_nbp = with_proprio(out.nbp, t.next_roi, cfg);
  out.camera = t.camera;
  out.gripper = t.gripper;
  out.rewards = t.rewards;
  out.terminal = t.terminal;
  return out;
}

}  // namespace avam
