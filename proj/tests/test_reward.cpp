#include <random>

#include <doctest.h>

#include "avam/reward.hpp"
#include "oracles.hpp"

namespace avam {
namespace {

TEST_CASE("voxel entropy examples") {
  CHECK(voxel_entropy(0.5) == 1.0);
  CHECK(voxel_entropy(0.0) == 0.0);
  CHECK(voxel_entropy(1.0) == 0.0);
  // -0.25 log2 0.25 - 0.75 log2 0.75 = 2 - 0.75 log2 3
  CHECK(voxel_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-14));
  CHECK_THROWS_AS(voxel_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(voxel_entropy(1.01), std::invalid_argument);
}

TEST_CASE("property: voxel entropy is symmetric, bounded and matches an independent form") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double p = oracle::uniform(rng, 0.0, 1.0);
    const double h = voxel_entropy(p);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
    CHECK(h == doctest::Approx(voxel_entropy(1.0 - p)).epsilon(1e-12));
    CHECK(h == doctest::Approx(oracle::binary_entropy(p)).epsilon(1e-12));
  }
}

TEST_CASE("beliefs implied by labels") {
  CHECK(occupancy_belief(Visibility::kOccluded) == 0.5);
  CHECK(occupancy_belief(Visibility::kObservedOccupied) == 1.0);
  CHECK(occupancy_belief(Visibility::kObservedFree) == 0.0);
}

TEST_CASE("roi entropy examples") {
  std::vector<Visibility> all_occ(64, Visibility::kOccluded);
  CHECK(roi_entropy(all_occ) == 1.0);
  std::vector<Visibility> seen(64, Visibility::kObservedFree);
  for (int i = 0; i < 32; ++i) seen[i] = Visibility::kObservedOccupied;
  CHECK(roi_entropy(seen) == 0.0);
  std::vector<Visibility> half(64, Visibility::kObservedFree);
  for (int i = 0; i < 32; ++i) half[2 * i] = Visibility::kOccluded;
  CHECK(roi_entropy(half) == 0.5);
}

TEST_CASE("property: roi entropy equals the occluded fraction") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> label(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 4096)(rng);
    std::vector<Visibility> labels(n);
    int occluded = 0;
    for (auto& l : labels) {
      l = static_cast<Visibility>(label(rng));
      occluded += l == Visibility::kOccluded;
    }
    CHECK(roi_entropy(labels) == static_cast<double>(occluded) / n);
  }
}

TEST_CASE("entropy reduction reward") {
  CHECK(entropy_reduction_reward(1.0, 0.0) == 1.0);
  CHECK(entropy_reduction_reward(0.4, 0.4) == 0.0);
  CHECK(entropy_reduction_reward(0.2, 0.6) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(entropy_reduction_reward(0.5, 0.25, 2.0) == 0.5);
}

TEST_CASE("interaction reward table") {
  CHECK(interaction_reward(RoiStatus::kReachableNonEmpty) == 0.02);
  CHECK(interaction_reward(RoiStatus::kReachableEmpty) == 0.0);
  CHECK(interaction_reward(RoiStatus::kUnreachable) == -0.02);
}

TEST_CASE("compose rewards examples") {
  RewardBundle b = compose_rewards(1.0, 0.02, 0.3);
  CHECK(b.r_nbv == doctest::Approx(1.32).epsilon(1e-15));
  CHECK(b.r_nbp == doctest::Approx(1.02).epsilon(1e-15));
  b = compose_rewards(0, 0, 0);
  CHECK(b.r_nbv == 0.0);
  CHECK(b.r_nbp == 0.0);
  b = compose_rewards(0, -0.02, -0.1);
  CHECK(b.r_nbv == doctest::Approx(-0.12).epsilon(1e-15));
  CHECK(b.r_nbp == doctest::Approx(-0.02).epsilon(1e-15));
}

TEST_CASE("property: nbv and nbp rewards differ by the entropy term") {
  std::mt19937_64 rng(3);
  const double statuses[] = {0.02, 0.0, -0.02};
  for (int i = 0; i < 10000; ++i) {
    const double task = (i % 2) ? 1.0 : 0.0;
    const double ri = statuses[i % 3];
    const double re = oracle::uniform(rng, -1.0, 1.0);
    const RewardBundle b = compose_rewards(task, ri, re);
    CHECK(b.r_nbp == task + ri);
    CHECK(std::abs((b.r_nbv - b.r_nbp) - re) <= 1e-15);
  }
}

TEST_CASE("string round trips") {
  for (auto s : {RoiStatus::kReachableNonEmpty, RoiStatus::kReachableEmpty, RoiStatus::kUnreachable}) {
    CHECK(roi_status_from_string(to_string(s)) == s);
  }
  CHECK_THROWS(roi_status_from_string("nope"));
}

}  // namespace
}  // namespace avam
