#pragma once

#include <span>
#include <string>

#include "avam/voxel.hpp"

namespace avam {

enum class RoiStatus { kReachableNonEmpty, kReachableEmpty, kUnreachable };

/// Shannon entropy in bits of a Bernoulli occupancy belief; 0 log 0 = 0.
/// Throws std::invalid_argument for p outside [0, 1].
double voxel_entropy(double p);

/// Occupancy belief implied by a visibility label: occluded 0.5, observed
/// occupied 1, observed free 0.
double occupancy_belief(Visibility label);

/// Mean voxel entropy over the ROI. Under the hard {0, 0.5, 1} belief this is
/// the fraction of occluded voxels.
double roi_entropy(const ObservedGrid& roi);
double roi_entropy(std::span<const Visibility> labels);

/// r_e = k * (E_t - E_t').
double entropy_reduction_reward(double e_before, double e_after, double k = 1.0);

/// 0.02 reachable and non-empty, 0 reachable but empty, -0.02 unreachable.
double interaction_reward(RoiStatus status);

struct RewardBundle {
  double r_task = 0.0;
  double r_i = 0.0;
  double r_e = 0.0;
  double r_nbv = 0.0;
  double r_nbp = 0.0;
};

RewardBundle compose_rewards(double r_task, double r_i, double r_e);

std::string to_string(RoiStatus status);
RoiStatus roi_status_from_string(const std::string& s);

}  // namespace avam
