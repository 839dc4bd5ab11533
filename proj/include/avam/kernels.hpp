#pragma once

// Data-parallel inner loops. Every driver takes an Exec switch: kParallel runs
// the OpenMP loop, kSerial the plain reference loop over the same per-element
// function. Both produce bit-identical output because elements are
// independent and no reduction crosses elements.

#include <cstdint>
#include <span>

#include "avam/voxel.hpp"

namespace avam::kernels {

struct SolidHit {
  double t = 0.0;
  int solid = -1;  // -1: no hit
};

/// First solid hit along origin + t * dir, t > 0. Ties keep the lowest index.
SolidHit first_hit(const SceneSpec& scene, const Vec3& origin, const Vec3& dir);

/// Traverses the segment camera -> center of voxel `target` with 3D DDA.
/// Returns true when an occupied voxel other than `target` is crossed first.
bool dda_occluded(const VoxelGrid& grid, const Vec3& camera, std::size_t target);

void render(const SceneSpec& scene, const CameraPose& cam, const ImageSpec& image,
            DepthImage& out, Exec exec);

void visibility(const VoxelGrid& grid, const Vec3& camera,
                std::span<Visibility> labels, Exec exec);

/// Marks voxels whose centers fall inside any solid. Voxel centers are given
/// in a frame rotated by `to_world` relative to the scene.
void solid_occupancy(const SceneSpec& scene, const AzimuthRotation& to_world,
                     VoxelGrid& grid, Exec exec);

/// For each voxel of `grid` (local frame), flags whether the world-space
/// segment from `camera_world` to the voxel center is blocked by any scene
/// solid before it enters the grid's bounds.
void external_occlusion(const SceneSpec& scene, const AzimuthRotation& to_world,
                        const VoxelGrid& grid, const Vec3& camera_world,
                        std::span<std::uint8_t> blocked, Exec exec);

}  // namespace avam::kernels
