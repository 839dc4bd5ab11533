#pragma once

#include <cstdint>
#include <vector>

#include "avam/geometry.hpp"
#include "avam/scene.hpp"

namespace avam {

/// Selects between the OpenMP kernels and their serial references.
enum class Exec { kSerial, kParallel };

struct ImageSpec {
  int width = 129;
  int height = 129;
  double vertical_fov = deg2rad(60.0);
};

struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<double> depth;      // metres along the ray, +inf = no hit
  std::vector<Feature> feature;   // feature of the hit solid, zero on miss

  std::size_t pixel(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Feature> features;

  std::size_t size() const { return positions.size(); }
  void push_back(const Vec3& p, const Feature& f) {
    positions.push_back(p);
    features.push_back(f);
  }
};

/// Cubic grid of dims^3 voxels centered at `center`; bins are half-open
/// [lo, hi) along every axis.
struct GridSpec {
  Vec3 center = Vec3::Zero();
  double resolution = 0.05;
  int dims = 16;

  Vec3 origin() const { return center - Vec3::Constant(0.5 * dims * resolution); }
  Aabb bounds() const {
    const Vec3 o = origin();
    return Aabb{o, o + Vec3::Constant(dims * resolution)};
  }
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims) * dims * dims;
  }
  std::size_t flatten(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * dims + iy) * dims + iz;
  }
  Index3 unflatten(std::size_t flat) const {
    const auto d = static_cast<std::size_t>(dims);
    return Index3(static_cast<int>(flat / (d * d)), static_cast<int>((flat / d) % d),
                  static_cast<int>(flat % d));
  }
  Vec3 voxel_center(const Index3& idx) const {
    return origin() + (idx.cast<double>().array() + 0.5).matrix() * resolution;
  }
  Aabb voxel_bounds(const Index3& idx) const {
    const Vec3 lo = origin() + idx.cast<double>() * resolution;
    return Aabb{lo, lo + Vec3::Constant(resolution)};
  }
  /// floor((p - origin) / e) per axis; false when out of bounds.
  bool locate(const Vec3& p, Index3& idx) const;

  bool operator==(const GridSpec&) const = default;
};

struct VoxelGrid {
  GridSpec spec;
  std::vector<Vec3> centroid;
  std::vector<Feature> feature;
  std::vector<std::uint8_t> occupied;

  explicit VoxelGrid(const GridSpec& s = GridSpec{});

  std::size_t size() const { return occupied.size(); }
  std::size_t occupied_count() const;
};

enum class Visibility : std::uint8_t { kObservedOccupied, kObservedFree, kOccluded };

struct ObservedGrid {
  VoxelGrid grid;
  std::vector<Visibility> labels;
};

DepthImage render_depth(const SceneSpec& scene, const CameraPose& cam,
                        const ImageSpec& image, Exec exec = Exec::kParallel);

/// Unit ray direction through the center of pixel (u, v).
Vec3 pixel_ray(const CameraPose& cam, const ImageSpec& image, int u, int v);

PointCloud depth_to_pointcloud(const DepthImage& img, const CameraPose& cam,
                               const ImageSpec& image);

/// Mean centroid and mean feature per occupied voxel; out-of-bounds points
/// are dropped. Degenerate specs (e <= 0 or dims < 1) yield an empty grid.
VoxelGrid voxelize(const PointCloud& pc, const GridSpec& spec);

/// Visibility of every voxel center from `camera`, by 3D DDA through the
/// grid's occupied voxels.
ObservedGrid label_visibility(VoxelGrid grid, const Vec3& camera,
                              Exec exec = Exec::kParallel);

/// Voxelizes the points that fall inside the axis-aligned cube of side `side`
/// centered at `f`, on a grid of resolution `e_roi` centered at `f`.
VoxelGrid crop_roi(const PointCloud& pc, const Vec3& f, double side, double e_roi);

}  // namespace avam
