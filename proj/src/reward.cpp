#include "avam/reward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace avam {

double voxel_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("occupancy probability must lie in [0, 1]");
  }
  auto term = [](double q) { return q > 0.0 ? -q * std::log2(q) : 0.0; };
  return term(p) + term(1.0 - p);
}

double occupancy_belief(Visibility label) {
  switch (label) {
    case Visibility::kObservedOccupied: return 1.0;
    case Visibility::kObservedFree: return 0.0;
    case Visibility::kOccluded: return 0.5;
  }
  return 0.5;
}

double roi_entropy(std::span<const Visibility> labels) {
  if (labels.empty()) throw std::invalid_argument("ROI has no voxels");
  double sum = 0.0;
  for (auto label : labels) sum += voxel_entropy(occupancy_belief(label));
  return sum / static_cast<double>(labels.size());
}

double roi_entropy(const ObservedGrid& roi) { return roi_entropy(roi.labels); }

double entropy_reduction_reward(double e_before, double e_after, double k) {
  return k * (e_before - e_after);
}

double interaction_reward(RoiStatus status) {
  switch (status) {
    case RoiStatus::kReachableNonEmpty: return 0.02;
    case RoiStatus::kReachableEmpty: return 0.0;
    case RoiStatus::kUnreachable: return -0.02;
  }
  return 0.0;
}

RewardBundle compose_rewards(double r_task, double r_i, double r_e) {
  RewardBundle b;
  b.r_task = r_task;
  b.r_i = r_i;
  b.r_e = r_e;
  b.r_nbp = r_task + r_i;
  b.r_nbv = b.r_nbp + r_e;
  return b;
}

std::string to_string(RoiStatus status) {
  switch (status) {
    case RoiStatus::kReachableNonEmpty: return "reachable-nonempty";
    case RoiStatus::kReachableEmpty: return "reachable-empty";
    case RoiStatus::kUnreachable: return "unreachable";
  }
  return "unreachable";
}

RoiStatus roi_status_from_string(const std::string& s) {
  if (s == "reachable-nonempty") return RoiStatus::kReachableNonEmpty;
  if (s == "reachable-empty") return RoiStatus::kReachableEmpty;
  if (s == "unreachable") return RoiStatus::kUnreachable;
  throw std::invalid_argument("unknown ROI status: " + s);
}

}  // namespace avam
