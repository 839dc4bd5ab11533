#pragma once

#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace avam {

using Vec3 = Eigen::Vector3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultViewRadius = 1.2;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }

/// Wraps an angle into [0, 2*pi).
double wrap_angle(double angle);

/// cos/sin of an azimuth. Angles within 1e-9 of a multiple of 15 degrees are
/// snapped to a table whose quarter-turn entries are exact negations/swaps of
/// each other, so that rotating a scene by 90 degrees and shifting the camera
/// azimuth by 90 degrees reproduces every intermediate value bit for bit.
std::pair<double, double> azimuth_cos_sin(double phi);

/// Camera location on the upper view hemisphere.
struct Viewpoint {
  double r = kDefaultViewRadius;
  double theta = 0.0;  // polar angle from zenith
  double phi = 0.0;    // azimuth from +x

  /// Validates (r > 0, 0 < theta <= pi/2) and normalizes phi.
  static Viewpoint make(double r, double theta, double phi);

  bool operator==(const Viewpoint&) const = default;
};

struct GripperPose {
  Vec3 position = Vec3::Zero();
  Vec3 orientation = Vec3::Zero();  // roll, pitch, yaw
  double closure = 0.0;             // tip distance d, 0 = fully closed

  double yaw() const { return orientation.z(); }
};

struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // unit optical axis, toward the hemisphere center
};

CameraPose viewpoint_to_camera_pose(const Viewpoint& v, const Vec3& center);

/// Rotation about +z by a fixed azimuth. `to_local` applies Rot^-1(z, phi),
/// `to_world` applies Rot(z, phi).
class AzimuthRotation {
 public:
  explicit AzimuthRotation(double phi);

  double angle() const { return phi_; }
  Vec3 to_local(const Vec3& p) const;
  Vec3 to_world(const Vec3& p) const;

 private:
  double phi_;
  double c_;
  double s_;
};

/// World frame {W} -> viewpoint-aligned frame {L}: rotates every point about z
/// by -phi_v.
std::vector<Vec3> align_points(std::span<const Vec3> points, double phi_v);

struct WorldTargets {
  Viewpoint viewpoint;
  Vec3 roi_center;
  GripperPose gripper;
};

/// {L} -> {W} for the goal viewpoint, ROI center and gripper pose.
WorldTargets inverse_align(const Viewpoint& v_local, const Vec3& roi_center_local,
                           const GripperPose& gripper_local, double phi_v);

/// Discrete viewpoint bins: theta centers x phi_count evenly spaced azimuths.
/// Index k = theta_index * phi_count + phi_index.
class ViewpointBins {
 public:
  ViewpointBins(std::vector<double> theta_centers, int phi_count,
                double radius = kDefaultViewRadius);

  /// 4 polar centers {15, 35, 55, 75} deg x 12 azimuths.
  static ViewpointBins defaults();

  int size() const { return static_cast<int>(theta_centers_.size()) * phi_count_; }
  int theta_count() const { return static_cast<int>(theta_centers_.size()); }
  int phi_count() const { return phi_count_; }
  double radius() const { return radius_; }
  const std::vector<double>& theta_centers() const { return theta_centers_; }

  Viewpoint undiscretize(int index) const;
  int discretize(const Viewpoint& v) const;
  std::vector<Viewpoint> all() const;

 private:
  std::vector<double> theta_centers_;
  int phi_count_;
  double radius_;
};

using Index3 = Eigen::Vector3i;

/// Regular lattice of bins over an axis-aligned box, x-major flat index.
class Lattice3 {
 public:
  Lattice3(const Vec3& lo, const Vec3& hi, int count);

  int count() const { return count_; }
  int size() const { return count_ * count_ * count_; }
  const Vec3& lo() const { return lo_; }
  const Vec3& hi() const { return hi_; }

  Vec3 center(int flat) const;
  /// Nearest bin center; points outside the box clamp to the border bins.
  int nearest(const Vec3& p) const;

  int flatten(const Index3& idx) const {
    return (idx.x() * count_ + idx.y()) * count_ + idx.z();
  }
  Index3 unflatten(int flat) const;

 private:
  Vec3 lo_;
  Vec3 hi_;
  Vec3 step_;
  int count_;
};

}  // namespace avam
