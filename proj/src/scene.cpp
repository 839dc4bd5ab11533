#include "avam/scene.hpp"

#include <algorithm>
#include <stdexcept>

namespace avam {

std::optional<RayHit> intersect_ray_aabb(const Vec3& origin, const Vec3& dir,
                                         const Aabb& box, double t_min, double t_max) {
  double t0 = t_min;
  double t1 = t_max;
  for (int a = 0; a < 3; ++a) {
    const double o = origin[a];
    const double d = dir[a];
    if (d == 0.0) {
      if (o < box.lo[a] || o > box.hi[a]) return std::nullopt;
      continue;
    }
    double ta = (box.lo[a] - o) / d;
    double tb = (box.hi[a] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return RayHit{t0, t1};
}

std::string to_string(SolidRole role) {
  switch (role) {
    case SolidRole::kTarget: return "target";
    case SolidRole::kOccluder: return "occluder";
    case SolidRole::kClutter: return "clutter";
  }
  return "clutter";
}

SolidRole solid_role_from_string(const std::string& s) {
  if (s == "target") return SolidRole::kTarget;
  if (s == "occluder") return SolidRole::kOccluder;
  if (s == "clutter") return SolidRole::kClutter;
  throw std::invalid_argument("unknown solid role: " + s);
}

void SceneSpec::validate() const {
  int targets = 0;
  for (const auto& s : solids) {
    if ((s.box.hi - s.box.lo).minCoeff() <= 0.0) {
      throw std::invalid_argument("degenerate solid");
    }
    if (!s.box.lo.allFinite() || !s.box.hi.allFinite()) {
      throw std::invalid_argument("non-finite solid bounds");
    }
    if (s.role == SolidRole::kTarget) {
      ++targets;
      if (!workspace.contains(s.box.center())) {
        throw std::invalid_argument("target lies outside the workspace");
      }
    }
  }
  if (targets != 1) throw std::invalid_argument("scene needs exactly one target");
}

int SceneSpec::target_index() const {
  for (std::size_t i = 0; i < solids.size(); ++i) {
    if (solids[i].role == SolidRole::kTarget) return static_cast<int>(i);
  }
  throw std::invalid_argument("scene has no target");
}

const Solid& SceneSpec::target() const { return solids[target_index()]; }

namespace {

Vec3 quarter_turn(const Vec3& p, const Vec3& c) {
  const double x = p.x() - c.x();
  const double y = p.y() - c.y();
  return Vec3(-y + c.x(), x + c.y(), p.z());
}

Aabb quarter_turn(const Aabb& b, const Vec3& c) {
  const Vec3 a = quarter_turn(b.lo, c);
  const Vec3 d = quarter_turn(b.hi, c);
  return Aabb{a.cwiseMin(d), a.cwiseMax(d)};
}

}  // namespace

SceneSpec rotate_scene_quarter_turns(const SceneSpec& scene, int quarter_turns) {
  SceneSpec out = scene;
  const int turns = ((quarter_turns % 4) + 4) % 4;
  const Vec3& c = scene.hemisphere_center;
  for (int t = 0; t < turns; ++t) {
    out.workspace = quarter_turn(out.workspace, c);
    out.goal = quarter_turn(out.goal, c);
    for (auto& s : out.solids) s.box = quarter_turn(s.box, c);
  }
  return out;
}

}  // namespace avam
