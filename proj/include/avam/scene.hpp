#pragma once

#include <optional>
#include <string>
#include <vector>

#include "avam/geometry.hpp"

namespace avam {

/// Per-point / per-voxel feature (M = 3, color-like).
using Feature = Eigen::Vector3d;
inline constexpr int kFeatureDim = 3;

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  /// Closed-box containment.
  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
  bool operator==(const Aabb&) const = default;
};

struct RayHit {
  double t_enter;
  double t_exit;
};

/// Slab test of origin + t * dir against a closed box for t in [t_min, t_max].
std::optional<RayHit> intersect_ray_aabb(const Vec3& origin, const Vec3& dir,
                                         const Aabb& box, double t_min, double t_max);

enum class SolidRole { kTarget, kOccluder, kClutter };

std::string to_string(SolidRole role);
SolidRole solid_role_from_string(const std::string& s);

struct Solid {
  Aabb box;
  Feature feature = Feature::Zero();
  SolidRole role = SolidRole::kClutter;
};

struct SceneSpec {
  Aabb workspace;
  std::vector<Solid> solids;
  Vec3 hemisphere_center = Vec3::Zero();
  Vec3 goal = Vec3::Zero();   // gripper goal position for task success
  bool goal_closed = true;    // required closure state at the goal

  /// Throws std::invalid_argument unless exactly one target exists inside the
  /// workspace and every solid has positive volume.
  void validate() const;
  const Solid& target() const;
  int target_index() const;
};

/// Rotates every solid, the workspace and the goal about the vertical axis
/// through the hemisphere center by quarter_turns * 90 degrees. The mapping
/// only swaps and negates coordinates, so it is exact.
SceneSpec rotate_scene_quarter_turns(const SceneSpec& scene, int quarter_turns);

}  // namespace avam
