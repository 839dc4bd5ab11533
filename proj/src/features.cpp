#include "avam/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace avam {

void ObsFeatures::write_to(double* out) const {
  if (!voxels || voxels->size() != 2 * kCoarseCells) {
    throw std::invalid_argument("feature vector has no voxel part");
  }
  std::copy(voxels->begin(), voxels->end(), out);
  std::copy(proprio.begin(), proprio.end(), out + 2 * kCoarseCells);
}

Eigen::VectorXd ObsFeatures::dense() const {
  Eigen::VectorXd x(kFeatureLength);
  write_to(x.data());
  return x;
}

std::vector<float> coarse_voxel_features(const VoxelGrid& grid) {
  const int d = grid.spec.dims;
  if (d < kCoarseDims || d % kCoarseDims != 0) {
    throw std::invalid_argument("grid dims must be a multiple of 8");
  }
  const int f = d / kCoarseDims;
  std::vector<float> out(2 * kCoarseCells, 0.0f);
  for (int cx = 0; cx < kCoarseDims; ++cx) {
    for (int cy = 0; cy < kCoarseDims; ++cy) {
      for (int cz = 0; cz < kCoarseDims; ++cz) {
        int occupied = 0;
        double feature = 0.0;
        for (int i = 0; i < f; ++i) {
          for (int j = 0; j < f; ++j) {
            for (int k = 0; k < f; ++k) {
              const std::size_t v = grid.spec.flatten(cx * f + i, cy * f + j, cz * f + k);
              if (!grid.occupied[v]) continue;
              ++occupied;
              feature += grid.feature[v].mean();
            }
          }
        }
        const int c = (cx * kCoarseDims + cy) * kCoarseDims + cz;
        out[c] = static_cast<float>(static_cast<double>(occupied) / (f * f * f));
        if (occupied > 0) out[kCoarseCells + c] = static_cast<float>(feature / occupied);
      }
    }
  }
  return out;
}

std::array<float, kProprioDim> proprio_features(const Viewpoint& v, const GripperPose& g,
                                                double frame_phi, const Aabb& box,
                                                double gripper_open) {
  const AzimuthRotation rot(frame_phi);
  const Vec3 p = rot.to_local(g.position);
  const Vec3 center = box.center();
  const Vec3 half = 0.5 * box.extent();
  const double rel_phi = v.phi - frame_phi;
  const double rel_yaw = g.yaw() - frame_phi;
  std::array<float, kProprioDim> out{};
  out[0] = static_cast<float>(std::sin(v.theta));
  out[1] = static_cast<float>(std::cos(v.theta));
  out[2] = static_cast<float>(std::sin(rel_phi));
  out[3] = static_cast<float>(std::cos(rel_phi));
  for (int a = 0; a < 3; ++a) {
    out[4 + a] = static_cast<float>(std::clamp((p[a] - center[a]) / half[a], -1.0, 1.0));
  }
  out[7] = static_cast<float>(std::sin(rel_yaw));
  out[8] = static_cast<float>(std::cos(rel_yaw));
  out[9] = static_cast<float>(std::clamp(g.closure / gripper_open, 0.0, 1.0));
  return out;
}

ObsFeatures nbv_features(const SceneObservation& obs, const EnvConfig& cfg) {
  ObsFeatures f;
  f.voxels = std::make_shared<const std::vector<float>>(coarse_voxel_features(obs.grid));
  f.proprio = proprio_features(obs.viewpoint, obs.gripper, obs.frame_phi, cfg.workspace,
                               cfg.gripper_open);
  return f;
}

ObsFeatures nbp_features(const RoiObservation& obs, const EnvConfig& cfg) {
  ObsFeatures f;
  f.voxels = std::make_shared<const std::vector<float>>(coarse_voxel_features(obs.grid));
  return with_proprio(f, obs, cfg);
}

ObsFeatures with_proprio(const ObsFeatures& base, const RoiObservation& obs,
                         const EnvConfig& cfg) {
  ObsFeatures f;
  f.voxels = base.voxels;
  // Gripper position relative to the ROI cube.
  f.proprio = proprio_features(obs.viewpoint, obs.gripper, obs.frame_phi, obs.grid.spec.bounds(),
                               cfg.gripper_open);
  return f;
}

}  // namespace avam
