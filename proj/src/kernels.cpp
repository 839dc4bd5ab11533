#include "avam/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace avam::kernels {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Visibility classify(const VoxelGrid& grid, const Vec3& camera, std::size_t v) {
  if (dda_occluded(grid, camera, v)) return Visibility::kOccluded;
  return grid.occupied[v] ? Visibility::kObservedOccupied : Visibility::kObservedFree;
}

void occupancy_at(const SceneSpec& scene, const AzimuthRotation& to_world,
                  VoxelGrid& grid, std::size_t v) {
  const Vec3 local = grid.spec.voxel_center(grid.spec.unflatten(v));
  const Vec3 world = to_world.to_world(local);
  grid.centroid[v] = local;
  grid.feature[v].setZero();
  grid.occupied[v] = 0;
  for (const auto& s : scene.solids) {
    if (s.box.contains(world)) {
      grid.occupied[v] = 1;
      grid.feature[v] = s.feature;
      return;
    }
  }
}

std::uint8_t blocked_at(const SceneSpec& scene, const AzimuthRotation& to_world,
                        const VoxelGrid& grid, const Vec3& camera_world,
                        const Vec3& camera_local, std::size_t v) {
  const Vec3 center_local = grid.spec.voxel_center(grid.spec.unflatten(v));
  const auto entry = intersect_ray_aabb(camera_local, center_local - camera_local,
                                        grid.spec.bounds(), 0.0, 1.0);
  if (!entry || entry->t_enter <= 0.0) return 0;
  const Vec3 seg = to_world.to_world(center_local) - camera_world;
  for (const auto& s : scene.solids) {
    const auto hit = intersect_ray_aabb(camera_world, seg, s.box, 0.0, entry->t_enter);
    if (hit && hit->t_exit > hit->t_enter) return 1;
  }
  return 0;
}

}  // namespace

SolidHit first_hit(const SceneSpec& scene, const Vec3& origin, const Vec3& dir) {
  SolidHit best{kInf, -1};
  for (std::size_t i = 0; i < scene.solids.size(); ++i) {
    const auto hit = intersect_ray_aabb(origin, dir, scene.solids[i].box, 0.0, kInf);
    if (!hit) continue;
    const double t = hit->t_enter;
    if (t > 0.0 && t < best.t) best = SolidHit{t, static_cast<int>(i)};
  }
  return best;
}

bool dda_occluded(const VoxelGrid& grid, const Vec3& camera, std::size_t target) {
  const GridSpec& spec = grid.spec;
  const Index3 goal = spec.unflatten(target);
  const Vec3 end = spec.voxel_center(goal);
  const Vec3 seg = end - camera;
  const auto entry = intersect_ray_aabb(camera, seg, spec.bounds(), 0.0, 1.0);
  if (!entry) return false;

  const Vec3 origin = spec.origin();
  const double e = spec.resolution;
  const Vec3 start = camera + entry->t_enter * seg;
  Index3 idx;
  Index3 step;
  Vec3 t_max;
  Vec3 t_delta;
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((start[a] - origin[a]) / e);
    idx[a] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(spec.dims - 1)));
    if (seg[a] > 0.0) {
      step[a] = 1;
      t_max[a] = (origin[a] + (idx[a] + 1) * e - camera[a]) / seg[a];
      t_delta[a] = e / seg[a];
    } else if (seg[a] < 0.0) {
      step[a] = -1;
      t_max[a] = (origin[a] + idx[a] * e - camera[a]) / seg[a];
      t_delta[a] = -e / seg[a];
    } else {
      step[a] = 0;
      t_max[a] = kInf;
      t_delta[a] = kInf;
    }
  }

  const int max_steps = 3 * spec.dims + 3;
  for (int i = 0; i < max_steps; ++i) {
    if (idx == goal) return false;
    if (grid.occupied[spec.flatten(idx.x(), idx.y(), idx.z())]) return true;
    int a = 0;
    if (t_max[1] < t_max[a]) a = 1;
    if (t_max[2] < t_max[a]) a = 2;
    idx[a] += step[a];
    if (idx[a] < 0 || idx[a] >= spec.dims) return false;
    t_max[a] += t_delta[a];
  }
  return false;
}

void render(const SceneSpec& scene, const CameraPose& cam, const ImageSpec& image,
            DepthImage& out, Exec exec) {
  out.width = image.width;
  out.height = image.height;
  const auto n = static_cast<std::size_t>(image.width) * image.height;
  out.depth.assign(n, kInf);
  out.feature.assign(n, Feature::Zero());
  const long long total = static_cast<long long>(n);
  auto body = [&](long long p) {
    const int u = static_cast<int>(p % image.width);
    const int v = static_cast<int>(p / image.width);
    const Vec3 dir = pixel_ray(cam, image, u, v);
    const SolidHit hit = first_hit(scene, cam.position, dir);
    if (hit.solid >= 0) {
      out.depth[p] = hit.t;
      out.feature[p] = scene.solids[hit.solid].feature;
    }
  };
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < total; ++p) body(p);
  } else {
    for (long long p = 0; p < total; ++p) body(p);
  }
}

void visibility(const VoxelGrid& grid, const Vec3& camera, std::span<Visibility> labels,
                Exec exec) {
  const auto total = static_cast<long long>(grid.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long long v = 0; v < total; ++v) labels[v] = classify(grid, camera, v);
  } else {
    for (long long v = 0; v < total; ++v) labels[v] = classify(grid, camera, v);
  }
}

void solid_occupancy(const SceneSpec& scene, const AzimuthRotation& to_world,
                     VoxelGrid& grid, Exec exec) {
  const auto total = static_cast<long long>(grid.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(static)
    for (long long v = 0; v < total; ++v) occupancy_at(scene, to_world, grid, v);
  } else {
    for (long long v = 0; v < total; ++v) occupancy_at(scene, to_world, grid, v);
  }
}

void external_occlusion(const SceneSpec& scene, const AzimuthRotation& to_world,
                        const VoxelGrid& grid, const Vec3& camera_world,
                        std::span<std::uint8_t> blocked, Exec exec) {
  const Vec3 camera_local = to_world.to_local(camera_world);
  const auto total = static_cast<long long>(grid.size());
  if (exec == Exec::kParallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (long long v = 0; v < total; ++v) {
      blocked[v] = blocked_at(scene, to_world, grid, camera_world, camera_local, v);
    }
  } else {
    for (long long v = 0; v < total; ++v) {
      blocked[v] = blocked_at(scene, to_world, grid, camera_world, camera_local, v);
    }
  }
}

}  // namespace avam::kernels
