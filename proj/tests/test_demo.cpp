#include <cstring>
#include <set>

#include <doctest.h>

#include "avam/demo.hpp"
#include "avam/rng.hpp"
#include "oracles.hpp"

namespace avam {
namespace {

DemoTrajectory frames_from(const std::vector<Viewpoint>& views,
                           const std::vector<Vec3>& positions,
                           const std::vector<double>& closures) {
  DemoTrajectory t;
  for (std::size_t i = 0; i < views.size(); ++i) {
    GripperPose g;
    g.position = positions[i];
    g.closure = closures[i];
    t.frames.push_back({static_cast<int>(i), views[i], g});
  }
  return t;
}

Viewpoint view(double phi_deg) { return Viewpoint::make(1.2, deg2rad(55), deg2rad(phi_deg)); }

bool same_grid(const VoxelGrid& a, const VoxelGrid& b) {
  return a.occupied == b.occupied &&
         std::memcmp(a.centroid.data(), b.centroid.data(), a.centroid.size() * sizeof(Vec3)) == 0 &&
         std::memcmp(a.feature.data(), b.feature.data(), a.feature.size() * sizeof(Feature)) == 0;
}

bool same_transition(const DemoTransition& a, const DemoTransition& b) {
  return a.segment == b.segment && a.start_frame == b.start_frame &&
         a.mid_frame == b.mid_frame && same_grid(a.obs.grid, b.obs.grid) &&
         a.camera == b.camera && same_grid(a.roi.grid, b.roi.grid) &&
         a.roi.labels == b.roi.labels && a.gripper == b.gripper &&
         same_grid(a.next.grid, b.next.grid) && a.rewards.r_nbv == b.rewards.r_nbv &&
         a.rewards.r_nbp == b.rewards.r_nbp && a.terminal == b.terminal &&
         a.success == b.success;
}

TEST_CASE("constant-pose trajectory yields one degenerate pair") {
  const DemoTrajectory t = frames_from(std::vector<Viewpoint>(5, view(0)),
                                       std::vector<Vec3>(5, Vec3(0, 0, 0.4)),
                                       std::vector<double>(5, 0.08));
  const KeyframeSet k = discover_keyframes(t);
  REQUIRE(k.size() == 1);
  CHECK(k[0] == KeyframePair{0, 0});
}

TEST_CASE("hand-traced single segment: camera settles at 2, gripper stops with closure at 7") {
  // Camera moves over frames 0->1->2 and holds; the gripper holds for frames
  // 0-2, moves on every frame from 3 to 7 and closes at 7.
  std::vector<Viewpoint> views{view(0), view(30), view(60), view(60),
                               view(60), view(60), view(60), view(60)};
  std::vector<Vec3> pos;
  for (int i = 0; i < 8; ++i) pos.push_back(Vec3(0, 0, 0.4 - 0.05 * std::max(0, i - 2)));
  std::vector<double> cl(8, 0.08);
  cl[7] = 0.0;
  const KeyframeSet k = discover_keyframes(frames_from(views, pos, cl));
  REQUIRE(k.size() == 1);
  CHECK(k[0] == KeyframePair{2, 7});
}

TEST_CASE("hand-traced two-phase demo") {
  // Phase 1: camera 0->2, gripper moves 3..6 and stops (frame 7 equals 6).
  // Phase 2: camera 7->9, gripper moves 11..13 and closes at 13.
  std::vector<Viewpoint> views;
  for (int i = 0; i < 15; ++i) {
    double phi = 60;
    if (i == 0) phi = 0;
    if (i == 1) phi = 30;
    if (i == 8) phi = 90;
    if (i >= 9) phi = 120;
    views.push_back(view(phi));
  }
  std::vector<Vec3> pos;
  for (int i = 0; i < 15; ++i) {
    double z = 0.4;
    if (i >= 3) z -= 0.05 * (std::min(i, 6) - 2);
    double x = 0.0;
    if (i >= 11) x = 0.05 * (std::min(i, 13) - 10);
    pos.push_back(Vec3(x, 0, z));
  }
  std::vector<double> cl(15, 0.08);
  for (int i = 13; i < 15; ++i) cl[i] = 0.0;
  const KeyframeSet k = discover_keyframes(frames_from(views, pos, cl));
  REQUIRE(k.size() == 2);
  CHECK(k[0] == KeyframePair{2, 6});
  CHECK(k[1] == KeyframePair{9, 13});
}

TEST_CASE("malformed trajectories") {
  CHECK_THROWS_AS(discover_keyframes(DemoTrajectory{}), std::invalid_argument);
  // Gripper keeps moving through the last frame without a closure change.
  std::vector<Vec3> pos;
  for (int i = 0; i < 4; ++i) pos.push_back(Vec3(0.1 * i, 0, 0.3));
  const DemoTrajectory moving = frames_from(std::vector<Viewpoint>(4, view(0)), pos,
                                            std::vector<double>(4, 0.08));
  CHECK_THROWS_AS(discover_keyframes(moving), std::invalid_argument);
  CHECK_THROWS_AS(KeyframeSet({{3, 2}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(KeyframeSet({{1, 3}, {2, 4}}, 5), std::invalid_argument);
  CHECK_THROWS_AS(KeyframeSet({{1, 5}}, 5), std::invalid_argument);
}

TEST_CASE("property: keyframe chain holds on scripted demos with varied timing") {
  const EnvConfig cfg;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, derive_seed(9, SeedStream::kDemo, s),
                                           1 + static_cast<int>(s % 6), static_cast<int>(s % 4));
    const KeyframeSet k = discover_keyframes(t);
    int prev = 0;
    for (const auto& p : k.pairs()) {
      CHECK(prev <= p.camera);
      CHECK(p.camera <= p.gripper);
      CHECK(p.gripper <= t.size() - 1);
      prev = p.gripper;
    }
  }
}

TEST_CASE("scripted demos replay to success and differ across seeds") {
  const EnvConfig cfg;
  Environment env(cfg);
  std::set<std::vector<double>> distinct;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, derive_seed(0, SeedStream::kDemo, s));
    const KeyframeSet k = discover_keyframes(t);
    const auto raw = build_raw_transitions(env, t, k);
    REQUIRE(raw.size() == static_cast<std::size_t>(k.size()));
    CHECK(raw.back().success);
    CHECK(raw.back().terminal);
    CHECK(raw.back().rewards.r_task == 1.0);
    const Vec3& g = t.scene.goal;
    distinct.insert({g.x(), g.y(), g.z(), t.frames[k[0].camera].viewpoint.phi});
  }
  CHECK(distinct.size() == 30u);
}

TEST_CASE("raw transitions: one per segment, camera action discretizes the keyframe view") {
  const EnvConfig cfg;
  Environment env(cfg);
  const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, 4);
  const KeyframeSet k = discover_keyframes(t);
  const auto raw = build_raw_transitions(env, t, k);
  REQUIRE(raw.size() == 1u);
  const ViewpointBins bins = cfg.view_bins();
  for (std::size_t j = 0; j < raw.size(); ++j) {
    Viewpoint local = t.frames[k[j].camera].viewpoint;
    local.phi = wrap_angle(local.phi - raw[j].obs.frame_phi);
    CHECK(raw[j].camera.view_bin == bins.discretize(local));
    CHECK(raw[j].start_frame == k.segment_start(static_cast<int>(j)));
    CHECK(raw[j].mid_frame == k[j].camera);
  }
}

TEST_CASE("augmentation: count zero and width-zero intervals") {
  const EnvConfig cfg;
  Environment env(cfg);
  const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, 6);
  const KeyframeSet k = discover_keyframes(t);
  CHECK(augment_transitions(env, t, k, 1, 0).empty());
  CHECK_THROWS_AS(sample_augmented_indices(k, 1, -1), std::invalid_argument);

  const KeyframeSet flat({{0, 0}}, t.size());
  const auto raw = build_raw_transitions(env, t, flat);
  const auto aug = augment_transitions(env, t, flat, 77, 3);
  REQUIRE(aug.size() == 3u);
  for (const auto& a : aug) CHECK(same_transition(a, raw[0]));
}

TEST_CASE("augmented transitions keep the raw targets and rewards") {
  const EnvConfig cfg;
  Environment env(cfg);
  const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, 8);
  const KeyframeSet k = discover_keyframes(t);
  const auto raw = build_raw_transitions(env, t, k);
  const auto aug = augment_transitions(env, t, k, 5, 6);
  REQUIRE(aug.size() == 6u * raw.size());
  for (const auto& a : aug) {
    const DemoTransition& r = raw[a.segment];
    CHECK(a.rewards.r_nbv == r.rewards.r_nbv);
    CHECK(a.rewards.r_nbp == r.rewards.r_nbp);
    CHECK(a.terminal == r.terminal);
    CHECK(env.decode_view(a.camera.view_bin, a.obs.frame_phi) ==
          env.decode_view(r.camera.view_bin, r.obs.frame_phi));
    CHECK(a.start_frame >= k.segment_start(a.segment));
    CHECK(a.start_frame <= k[a.segment].camera);
    CHECK(a.mid_frame >= k[a.segment].camera);
    CHECK(a.mid_frame <= k[a.segment].gripper);
  }
  // Deterministic in the seed.
  const auto again = augment_transitions(env, t, k, 5, 6);
  for (std::size_t i = 0; i < aug.size(); ++i) CHECK(same_transition(aug[i], again[i]));
}

TEST_CASE("augmented indices are uniform over their closed intervals") {
  const KeyframeSet k({{1, 2}, {6, 9}}, 10);
  const auto idx = sample_augmented_indices(k, 2024, 10000);
  std::vector<long> start(5, 0);
  std::vector<long> mid(4, 0);
  for (const auto& a : idx) {
    if (a.segment != 1) continue;
    REQUIRE(a.start >= 2);
    REQUIRE(a.start <= 6);
    REQUIRE(a.mid >= 6);
    REQUIRE(a.mid <= 9);
    ++start[a.start - 2];
    ++mid[a.mid - 6];
  }
  CHECK(oracle::chi_squared_uniform_p(start) > 0.01);
  CHECK(oracle::chi_squared_uniform_p(mid) > 0.01);
}

}  // namespace
}  // namespace avam
