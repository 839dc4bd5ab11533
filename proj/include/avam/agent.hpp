#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "avam/env.hpp"
#include "avam/features.hpp"
#include "avam/network.hpp"

namespace avam {

struct TrainerConfig {
  double gamma = 0.5;
  double learning_rate = 5e-4;
  int batch_size = 32;
  int updates = 7000;
  int target_sync = 500;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.2;
  int online_capacity = 50000;
  int env_steps_per_update = 1;
  int pretrain_updates = 0;  // demo-only updates before any env interaction
  std::vector<int> hidden{128, 128};
  int chunk = 32;  // samples per gradient chunk; chunks run in parallel

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
  double epsilon(int update) const;
};

std::vector<int> nbv_heads(const EnvConfig& cfg);
std::vector<int> nbp_heads(const EnvConfig& cfg);

struct DualAgent {
  QNetwork nbv;
  QNetwork nbp;

  static DualAgent make(const EnvConfig& env, const std::vector<int>& hidden,
                        std::uint64_t seed);
};

/// One environment step seen by both agents: T_v = (o_t, a_c, o_t') and
/// T_p = (o_t', a_g, o_{t+1}), with the NBP bootstrap features at o_{t+1}.
struct Transition {
  ObsFeatures nbv;
  ObsFeatures nbp;
  ObsFeatures next_nbv;
  ObsFeatures next_nbp;
  CameraAction camera;
  GripperAction gripper;
  RewardBundle rewards;
  bool terminal = false;
};

/// Joint argmax of the additive (k_v, k_f) value; ties pick the lowest index.
CameraAction argmax_camera(std::span<const double> q_view, std::span<const double> q_roi);
GripperAction argmax_gripper(std::span<const double> q_translation,
                             std::span<const double> q_yaw, std::span<const double> q_closure);

CameraAction random_camera(const EnvConfig& cfg, std::mt19937_64& rng);
GripperAction random_gripper(const EnvConfig& cfg, std::mt19937_64& rng);

/// Epsilon-greedy selection. Every call draws one coin from `rng`, plus the
/// action indices when exploring.
CameraAction select_nbv(const QNetwork& net, const ObsFeatures& x, double epsilon,
                        const EnvConfig& cfg, std::mt19937_64& rng);
GripperAction select_nbp(const QNetwork& net, const ObsFeatures& x, double epsilon,
                         const EnvConfig& cfg, std::mt19937_64& rng);

/// Demo transitions are kept forever; online ones live in a ring buffer.
/// Sampling is uniform over the union.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t online_capacity = 50000);

  void add_demo(Transition t);
  void add_online(Transition t);
  std::size_t demo_size() const { return demo_.size(); }
  std::size_t online_size() const { return online_.size(); }
  std::size_t size() const { return demo_.size() + online_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Index i < demo_size() addresses the demo partition.
  const Transition& at(std::size_t i) const;
  std::vector<const Transition*> sample(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> demo_;
  std::deque<Transition> online_;
};

struct TdResult {
  double loss = 0.0;
  double nbv_loss = 0.0;
  double nbp_loss = 0.0;
};

struct TdTargets {
  Eigen::VectorXd nbv;
  Eigen::VectorXd nbp;
};

/// Bellman targets r + gamma * (1 - terminal) * max Q_target(next).
TdTargets td_targets(std::span<const Transition* const> batch, const DualAgent& target,
                     double gamma);

/// One Adam step on both networks; the loss is the sum of the two agents'
/// mean squared TD errors. Throws std::runtime_error on a non-finite loss.
TdResult td_update(std::span<const Transition* const> batch, DualAgent& online,
                   const DualAgent& target, Adam& nbv_opt, Adam& nbp_opt,
                   const TrainerConfig& cfg, Exec exec = Exec::kParallel);

enum class PolicyKind { kGreedy, kRandomView, kStaticCamera };

/// Runs one episode on `env` from `obs`, the observation returned by the
/// caller's reset. kRandomView draws the whole camera action uniformly;
/// kStaticCamera keeps the current viewpoint and takes the ROI from the NBV
/// network.
EpisodeOutcome run_episode(Environment& env, SceneObservation obs, const DualAgent& agent,
                           PolicyKind kind, double epsilon, std::mt19937_64& rng);

struct TrainingRow {
  int update = 0;
  double loss = 0.0;
  double nbv_loss = 0.0;
  double nbp_loss = 0.0;
  double epsilon = 0.0;
  int episodes = 0;
  int successes = 0;
  int timeouts = 0;
  int failures = 0;
};

class Trainer {
 public:
  Trainer(EnvConfig env_cfg, TrainerConfig cfg, Task task, std::uint64_t seed);

  void add_demo(Transition t) { replay_.add_demo(std::move(t)); }
  const ReplayBuffer& replay() const { return replay_; }
  const DualAgent& agent() const { return online_; }
  const std::vector<TrainingRow>& log() const { return log_; }

  /// Runs the configured number of updates; `on_row` sees every log row.
  void run(const std::function<void(const TrainingRow&)>& on_row = {});

 private:
  void env_step(double epsilon);

  EnvConfig env_cfg_;
  TrainerConfig cfg_;
  Task task_;
  std::uint64_t seed_;
  Environment env_;
  DualAgent online_;
  DualAgent target_;
  Adam nbv_opt_;
  Adam nbp_opt_;
  ReplayBuffer replay_;
  std::mt19937_64 rng_;
  std::vector<TrainingRow> log_;
  ObsFeatures current_;
  bool need_reset_ = true;
  std::uint64_t episode_index_ = 0;
  TrainingRow counts_;
};

}  // namespace avam
