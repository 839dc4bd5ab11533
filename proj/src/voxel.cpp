#include "avam/voxel.hpp"

#include <cmath>

#include "avam/kernels.hpp"

namespace avam {

bool GridSpec::locate(const Vec3& p, Index3& idx) const {
  const Vec3 o = origin();
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - o[a]) / resolution);
    if (!(f >= 0.0) || f >= dims) return false;
    idx[a] = static_cast<int>(f);
  }
  return true;
}

VoxelGrid::VoxelGrid(const GridSpec& s) : spec(s) {
  const std::size_t n = (s.dims > 0 && s.resolution > 0.0) ? s.voxel_count() : 0;
  centroid.resize(n);
  feature.assign(n, Feature::Zero());
  occupied.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) centroid[v] = s.voxel_center(s.unflatten(v));
}

std::size_t VoxelGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto o : occupied) n += o;
  return n;
}

Vec3 pixel_ray(const CameraPose& cam, const ImageSpec& image, int u, int v) {
  const Vec3& f = cam.axis;
  const double h = std::sqrt(f.x() * f.x() + f.y() * f.y());
  // Written out per component: the renderer's quarter-turn symmetry depends on
  // every coordinate being produced by the same scalar expression.
  const double rx = f.y() / h;
  const double ry = -f.x() / h;
  const double ux = ry * f.z();
  const double uy = -(rx * f.z());
  const double uz = rx * f.y() - ry * f.x();
  const double tan_half = std::tan(0.5 * image.vertical_fov);
  const double aspect = static_cast<double>(image.width) / image.height;
  const double a = ((u + 0.5) / image.width * 2.0 - 1.0) * tan_half * aspect;
  const double b = (1.0 - (v + 0.5) / image.height * 2.0) * tan_half;
  const Vec3 d(f.x() + a * rx + b * ux, f.y() + a * ry + b * uy, f.z() + b * uz);
  const double n = std::sqrt(d.x() * d.x() + d.y() * d.y() + d.z() * d.z());
  return Vec3(d.x() / n, d.y() / n, d.z() / n);
}

DepthImage render_depth(const SceneSpec& scene, const CameraPose& cam,
                        const ImageSpec& image, Exec exec) {
  DepthImage img;
  kernels::render(scene, cam, image, img, exec);
  return img;
}

PointCloud depth_to_pointcloud(const DepthImage& img, const CameraPose& cam,
                               const ImageSpec& image) {
  PointCloud pc;
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const std::size_t p = img.pixel(u, v);
      const double d = img.depth[p];
      if (!std::isfinite(d)) continue;
      const Vec3 dir = pixel_ray(cam, image, u, v);
      pc.push_back(cam.position + d * dir, img.feature[p]);
    }
  }
  return pc;
}

VoxelGrid voxelize(const PointCloud& pc, const GridSpec& spec) {
  VoxelGrid grid(spec);
  if (grid.size() == 0) return grid;
  std::vector<Vec3> pos_sum(grid.size(), Vec3::Zero());
  std::vector<Feature> feat_sum(grid.size(), Feature::Zero());
  std::vector<int> count(grid.size(), 0);
  Index3 idx;
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (!spec.locate(pc.positions[i], idx)) continue;
    const std::size_t v = spec.flatten(idx.x(), idx.y(), idx.z());
    pos_sum[v] += pc.positions[i];
    feat_sum[v] += pc.features[i];
    ++count[v];
  }
  for (std::size_t v = 0; v < grid.size(); ++v) {
    if (count[v] == 0) continue;
    grid.occupied[v] = 1;
    // + 0.0 folds a negative zero into +0 so equal grids compare equal bytewise
    grid.centroid[v] = (pos_sum[v] / count[v]).array() + 0.0;
    grid.feature[v] = (feat_sum[v] / count[v]).array() + 0.0;
  }
  return grid;
}

ObservedGrid label_visibility(VoxelGrid grid, const Vec3& camera, Exec exec) {
  ObservedGrid out{std::move(grid), {}};
  out.labels.resize(out.grid.size());
  kernels::visibility(out.grid, camera, out.labels, exec);
  return out;
}

VoxelGrid crop_roi(const PointCloud& pc, const Vec3& f, double side, double e_roi) {
  if (!(side > 0.0) || !(e_roi > 0.0)) {
    throw std::invalid_argument("ROI side and resolution must be positive");
  }
  GridSpec spec;
  spec.center = f;
  spec.resolution = e_roi;
  spec.dims = static_cast<int>(std::lround(side / e_roi));
  PointCloud inside;
  const Aabb cube = spec.bounds();
  for (std::size_t i = 0; i < pc.size(); ++i) {
    if (cube.contains(pc.positions[i])) inside.push_back(pc.positions[i], pc.features[i]);
  }
  return voxelize(inside, spec);
}

}  // namespace avam
