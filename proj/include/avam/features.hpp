#pragma once

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "avam/env.hpp"

namespace avam {

inline constexpr int kCoarseDims = 8;
inline constexpr int kCoarseCells = kCoarseDims * kCoarseDims * kCoarseDims;
inline constexpr int kProprioDim = 10;
inline constexpr int kFeatureLength = 2 * kCoarseCells + kProprioDim;

/// Network input split into the voxel part (shared between observations
/// that only differ in proprioception) and the proprioceptive scalars.
struct ObsFeatures {
  std::shared_ptr<const std::vector<float>> voxels;  // 2 * 8^3 entries
  std::array<float, kProprioDim> proprio{};

  void write_to(double* out) const;
  Eigen::VectorXd dense() const;
};

/// Downsamples a D^3 grid (D a multiple of 8) to 8^3 cells: occupied
/// fraction, then the channel-mean feature averaged over occupied voxels.
std::vector<float> coarse_voxel_features(const VoxelGrid& grid);

/// sin/cos theta, sin/cos of the azimuth relative to the frame, gripper
/// position (frame-aligned, normalized by `box`, clamped), sin/cos relative
/// yaw, closure fraction.
std::array<float, kProprioDim> proprio_features(const Viewpoint& v, const GripperPose& g,
                                                double frame_phi, const Aabb& box,
                                                double gripper_open);

ObsFeatures nbv_features(const SceneObservation& obs, const EnvConfig& cfg);
ObsFeatures nbp_features(const RoiObservation& obs, const EnvConfig& cfg);
/// NBP features of `obs` with only the proprioception replaced.
ObsFeatures with_proprio(const ObsFeatures& base, const RoiObservation& obs,
                         const EnvConfig& cfg);

}  // namespace avam
