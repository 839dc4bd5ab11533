#include "avam/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace avam {

double wrap_angle(double angle) {
  double a = std::fmod(angle, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  // fmod of a value just below 2*pi can round up to 2*pi after the shift
  if (a >= kTwoPi) a = 0.0;
  return a + 0.0;
}

std::pair<double, double> azimuth_cos_sin(double phi) {
  constexpr double step = kPi / 12.0;
  const double m_real = phi / step;
  const long long m = std::llround(m_real);
  if (std::abs(phi - static_cast<double>(m) * step) < 1e-9) {
    const int mm = static_cast<int>(((m % 24) + 24) % 24);
    const int quadrant = mm / 6;
    const int rem = mm % 6;
    const double c = rem == 0 ? 1.0 : std::cos(rem * step);
    const double s = rem == 0 ? 0.0 : std::sin(rem * step);
    switch (quadrant) {
      case 0: return {c, s};
      case 1: return {-s, c};
      case 2: return {-c, -s};
      default: return {s, -c};
    }
  }
  return {std::cos(phi), std::sin(phi)};
}

Viewpoint Viewpoint::make(double r, double theta, double phi) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("viewpoint radius must be positive");
  }
  if (!(theta > 0.0) || theta > kPi / 2.0 + 1e-12) {
    throw std::invalid_argument("viewpoint theta must lie in (0, pi/2]");
  }
  if (!std::isfinite(phi)) throw std::invalid_argument("viewpoint phi must be finite");
  return Viewpoint{r, std::min(theta, kPi / 2.0), wrap_angle(phi)};
}

CameraPose viewpoint_to_camera_pose(const Viewpoint& v, const Vec3& center) {
  const auto [c, s] = azimuth_cos_sin(v.phi);
  const double ring = v.r * std::sin(v.theta);
  const Vec3 offset(ring * c, ring * s, v.r * std::cos(v.theta));
  CameraPose pose;
  pose.position = center + offset;
  pose.axis = (center - pose.position) / v.r;
  return pose;
}

AzimuthRotation::AzimuthRotation(double phi) : phi_(phi) {
  const auto cs = azimuth_cos_sin(phi);
  c_ = cs.first;
  s_ = cs.second;
}

Vec3 AzimuthRotation::to_local(const Vec3& p) const {
  return Vec3(c_ * p.x() + s_ * p.y(), -s_ * p.x() + c_ * p.y(), p.z());
}

Vec3 AzimuthRotation::to_world(const Vec3& p) const {
  return Vec3(c_ * p.x() - s_ * p.y(), s_ * p.x() + c_ * p.y(), p.z());
}

std::vector<Vec3> align_points(std::span<const Vec3> points, double phi_v) {
  const AzimuthRotation rot(phi_v);
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(rot.to_local(p));
  return out;
}

WorldTargets inverse_align(const Viewpoint& v_local, const Vec3& roi_center_local,
                           const GripperPose& gripper_local, double phi_v) {
  const AzimuthRotation rot(phi_v);
  WorldTargets out;
  out.viewpoint = Viewpoint{v_local.r, v_local.theta, wrap_angle(v_local.phi + phi_v)};
  out.roi_center = rot.to_world(roi_center_local);
  out.gripper = gripper_local;
  out.gripper.position = rot.to_world(gripper_local.position);
  out.gripper.orientation.z() = gripper_local.orientation.z() + phi_v;
  return out;
}

ViewpointBins::ViewpointBins(std::vector<double> theta_centers, int phi_count,
                             double radius)
    : theta_centers_(std::move(theta_centers)), phi_count_(phi_count), radius_(radius) {
  if (theta_centers_.empty() || phi_count_ <= 0) {
    throw std::invalid_argument("viewpoint bins need at least one theta and phi bin");
  }
  for (double t : theta_centers_) {
    if (!(t > 0.0) || t > kPi / 2.0) {
      throw std::invalid_argument("theta bin centers must lie in (0, pi/2]");
    }
  }
  if (!std::is_sorted(theta_centers_.begin(), theta_centers_.end())) {
    throw std::invalid_argument("theta bin centers must be ascending");
  }
}

ViewpointBins ViewpointBins::defaults() {
  return ViewpointBins({deg2rad(15), deg2rad(35), deg2rad(55), deg2rad(75)}, 12);
}

Viewpoint ViewpointBins::undiscretize(int index) const {
  if (index < 0 || index >= size()) throw std::out_of_range("viewpoint bin index");
  const int ti = index / phi_count_;
  const int pi = index % phi_count_;
  return Viewpoint{radius_, theta_centers_[ti], pi * (kTwoPi / phi_count_)};
}

int ViewpointBins::discretize(const Viewpoint& v) const {
  int best_t = 0;
  double best_dt = std::numeric_limits<double>::infinity();
  for (int i = 0; i < theta_count(); ++i) {
    const double d = std::abs(v.theta - theta_centers_[i]);
    if (d < best_dt) {
      best_dt = d;
      best_t = i;
    }
  }
  const double spacing = kTwoPi / phi_count_;
  const double phi = wrap_angle(v.phi);
  int best_p = static_cast<int>(std::llround(phi / spacing)) % phi_count_;
  return best_t * phi_count_ + best_p;
}

std::vector<Viewpoint> ViewpointBins::all() const {
  std::vector<Viewpoint> out;
  out.reserve(size());
  for (int k = 0; k < size(); ++k) out.push_back(undiscretize(k));
  return out;
}

Lattice3::Lattice3(const Vec3& lo, const Vec3& hi, int count)
    : lo_(lo), hi_(hi), step_((hi - lo) / count), count_(count) {
  if (count <= 0 || (hi - lo).minCoeff() <= 0.0) {
    throw std::invalid_argument("lattice needs a positive extent and bin count");
  }
}

Vec3 Lattice3::center(int flat) const {
  const Index3 idx = unflatten(flat);
  return lo_ + (idx.cast<double>().array() + 0.5).matrix().cwiseProduct(step_);
}

int Lattice3::nearest(const Vec3& p) const {
  Index3 idx;
  for (int a = 0; a < 3; ++a) {
    const double f = std::floor((p[a] - lo_[a]) / step_[a]);
    idx[a] = static_cast<int>(std::clamp(f, 0.0, static_cast<double>(count_ - 1)));
  }
  return flatten(idx);
}

Index3 Lattice3::unflatten(int flat) const {
  if (flat < 0 || flat >= size()) throw std::out_of_range("lattice index");
  return Index3(flat / (count_ * count_), (flat / count_) % count_, flat % count_);
}

}  // namespace avam
