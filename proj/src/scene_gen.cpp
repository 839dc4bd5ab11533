// Randomized hidden-target scenes: a hood (roof, back wall, two side walls)
// covers the target on the table and opens toward the hemisphere center's
// opposite side, so only cameras facing the opening see the target.
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "avam/env.hpp"

namespace avam {

namespace {

const Feature kTableFeature(0.55, 0.45, 0.35);
const Feature kHoodFeature(0.25, 0.25, 0.30);
const Feature kClutterFeature(0.20, 0.50, 0.20);
const Feature kTargetFeature(0.95, 0.90, 0.85);

constexpr double kWall = 0.03;         // thicker than the e/2 sweep spacing
constexpr double kInnerHalf = 0.065;   // half width of the hood's opening
constexpr double kRoofBottom = 0.18;
constexpr double kFrontGap = 0.06;     // opening plane to target center
constexpr double kBackGap = 0.05;      // target center to back wall
constexpr double kClearance = 0.015;   // path distance to non-target solids

Aabb box(double x0, double x1, double y0, double y1, double z0, double z1) {
  return Aabb{Vec3(x0, y0, z0), Vec3(x1, y1, z1)};
}

double box_distance(const Aabb& b, const Vec3& p) {
  const Vec3 d = (b.lo - p).cwiseMax(p - b.hi).cwiseMax(Vec3::Zero());
  return d.norm();
}

bool overlaps(const Aabb& a, const Aabb& b, double margin) {
  return (a.lo.array() - margin < b.hi.array()).all() &&
         (b.lo.array() - margin < a.hi.array()).all();
}

// Hood and target with the opening facing -x, target at (rho, tau).
SceneSpec canonical_scene(Task task, double rho, double tau, const EnvConfig& cfg) {
  SceneSpec s;
  s.workspace = cfg.workspace;
  s.hemisphere_center = cfg.hemisphere_center;
  const double front = rho - kFrontGap;
  const double back = rho + kBackGap;
  const double y0 = tau - kInnerHalf;
  const double y1 = tau + kInnerHalf;
  const double roof_top = kRoofBottom + kWall;
  s.solids.push_back({box(back, back + kWall, y0 - kWall, y1 + kWall, 0.0, roof_top),
                      kHoodFeature, SolidRole::kOccluder});
  s.solids.push_back({box(front, back, y0 - kWall, y0, 0.0, kRoofBottom), kHoodFeature,
                      SolidRole::kOccluder});
  s.solids.push_back({box(front, back, y1, y1 + kWall, 0.0, kRoofBottom), kHoodFeature,
                      SolidRole::kOccluder});
  s.solids.push_back({box(front, back, y0 - kWall, y1 + kWall, kRoofBottom, roof_top),
                      kHoodFeature, SolidRole::kOccluder});
  if (task == Task::kHiddenReach) {
    s.solids.push_back({box(rho - 0.025, rho + 0.025, tau - 0.025, tau + 0.025, 0.0, 0.05),
                        kTargetFeature, SolidRole::kTarget});
    s.goal = Vec3(rho, tau, 0.025);
  } else {
    s.solids.push_back({box(rho - 0.03, rho + 0.03, tau - 0.03, tau + 0.03, 0.0, 0.02),
                        kTargetFeature, SolidRole::kTarget});
    s.goal = Vec3(rho, tau, 0.02);
  }
  s.goal_closed = true;
  return s;
}

bool path_clear(const SceneSpec& s, const Vec3& from, const Vec3& to) {
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const Vec3 p = from + (to - from) * (static_cast<double>(i) / n);
    for (const auto& solid : s.solids) {
      if (solid.role == SolidRole::kTarget) continue;
      if (box_distance(solid.box, p) < kClearance) return false;
    }
  }
  return true;
}

}  // namespace

SceneSpec generate_scene(Task task, std::uint64_t seed, const EnvConfig& cfg) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rho_dist(0.22, 0.28);
  std::uniform_real_distribution<double> tau_dist(-0.08, 0.08);
  std::uniform_int_distribution<int> turn_dist(0, 2);
  std::uniform_int_distribution<int> clutter_count(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int turns_for[3] = {0, 1, 3};  // the opening never faces the initial camera
  const ViewpointBins bins = cfg.view_bins();

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double rho = rho_dist(rng);
    const double tau = tau_dist(rng);
    const int turns = turns_for[turn_dist(rng)];
    SceneSpec s = rotate_scene_quarter_turns(canonical_scene(task, rho, tau, cfg), turns);

    const double beta = turns * 0.5 * kPi;
    const int n_clutter = clutter_count(rng);
    for (int c = 0; c < n_clutter; ++c) {
      const double side = (unit(rng) < 0.5 ? -1.0 : 1.0);
      const double az = beta + side * (0.5 * kPi + deg2rad(40.0 * unit(rng) - 20.0));
      const double r = 0.18 + 0.12 * unit(rng);
      const double half = 0.02 + 0.015 * unit(rng);
      const double height = 0.04 + 0.06 * unit(rng);
      const Vec3 c0(r * std::cos(az), r * std::sin(az), 0.0);
      const Aabb b{Vec3(c0.x() - half, c0.y() - half, 0.0),
                   Vec3(c0.x() + half, c0.y() + half, height)};
      bool ok = cfg.workspace.contains(b.lo) && cfg.workspace.contains(b.hi);
      for (const auto& other : s.solids) ok = ok && !overlaps(b, other.box, 0.03);
      if (ok) s.solids.push_back({b, kClutterFeature, SolidRole::kClutter});
    }
    const Aabb& ws = cfg.workspace;
    s.solids.insert(s.solids.begin(),
                    Solid{box(ws.lo.x(), ws.hi.x(), ws.lo.y(), ws.hi.y(), -0.05, 0.0),
                          kTableFeature, SolidRole::kClutter});

    s.validate();
    if (!path_clear(s, cfg.gripper_home, s.goal)) continue;
    const Viewpoint init = cfg.initial_viewpoint();
    if (target_pixels(s, cfg, init, 1) > 0) continue;
    if (scene_roi_entropy(s, cfg, s.goal, 0.0, init) <= 0.5) continue;
    // Try the azimuths facing the opening first.
    std::vector<Viewpoint> views = bins.all();
    std::stable_sort(views.begin(), views.end(), [&](const Viewpoint& a, const Viewpoint& b) {
      auto gap = [&](const Viewpoint& v) {
        return std::abs(std::remainder(v.phi - beta - kPi, kTwoPi));
      };
      return gap(a) < gap(b);
    });
    bool viewable = false;
    for (const auto& v : views) {
      if (target_pixels(s, cfg, v, 4) >= 4) {
        viewable = true;
        break;
      }
    }
    if (!viewable) continue;
    return s;
  }
  throw std::runtime_error("scene generator could not place a hidden, viewable target");
}

}  // namespace avam
