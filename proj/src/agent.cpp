#include "avam/agent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "avam/rng.hpp"

namespace avam {

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size < 1 || updates < 0 || target_sync < 1 || online_capacity < 1 ||
      env_steps_per_update < 0 || pretrain_updates < 0 || chunk < 1) {
    throw std::invalid_argument("trainer sizes out of range");
  }
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
        epsilon_end <= 1.0 && epsilon_decay_fraction >= 0.0)) {
    throw std::invalid_argument("epsilon schedule out of range");
  }
  for (int h : hidden) {
    if (h < 1) throw std::invalid_argument("hidden sizes must be positive");
  }
}

double TrainerConfig::epsilon(int update) const {
  const double horizon = epsilon_decay_fraction * updates;
  if (horizon <= 0.0) return epsilon_end;
  const double frac = std::min(1.0, update / horizon);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

std::vector<int> nbv_heads(const EnvConfig& cfg) {
  const int lattice = cfg.roi_lattice * cfg.roi_lattice * cfg.roi_lattice;
  return {static_cast<int>(cfg.theta_bins_deg.size()) * cfg.phi_bins, lattice};
}

std::vector<int> nbp_heads(const EnvConfig& cfg) {
  const int n = cfg.translation_lattice;
  return {n * n * n, cfg.yaw_bins, 2};
}

DualAgent DualAgent::make(const EnvConfig& env, const std::vector<int>& hidden,
                          std::uint64_t seed) {
  DualAgent a{QNetwork(kFeatureLength, hidden, nbv_heads(env)),
              QNetwork(kFeatureLength, hidden, nbp_heads(env))};
  a.nbv.init(derive_seed(seed, SeedStream::kNetworkInit, 0));
  a.nbp.init(derive_seed(seed, SeedStream::kNetworkInit, 1));
  return a;
}

namespace {

int argmax(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("empty head");
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

double max_of(const double* q, int n) { return *std::max_element(q, q + n); }

std::span<const double> head(const Eigen::VectorXd& out, const QNetwork& net, int h) {
  return {out.data() + net.head_offset(h), static_cast<std::size_t>(net.heads()[h])};
}

Eigen::VectorXd evaluate(const QNetwork& net, const ObsFeatures& x) {
  return net.forward(x.dense());
}

int uniform_index(int n, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

bool explore(double epsilon, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon;
}

Eigen::MatrixXd stack(std::span<const Transition* const> batch, ObsFeatures Transition::*field) {
  Eigen::MatrixXd x(kFeatureLength, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) (batch[i]->*field).write_to(x.col(i).data());
  return x;
}

}  // namespace

CameraAction argmax_camera(std::span<const double> q_view, std::span<const double> q_roi) {
  return {argmax(q_view), argmax(q_roi)};
}

GripperAction argmax_gripper(std::span<const double> q_translation,
                             std::span<const double> q_yaw, std::span<const double> q_closure) {
  if (q_closure.size() != 2) throw std::invalid_argument("closure head must have two entries");
  return {argmax(q_translation), argmax(q_yaw), argmax(q_closure) == 1};
}

CameraAction random_camera(const EnvConfig& cfg, std::mt19937_64& rng) {
  const auto heads = nbv_heads(cfg);
  const int v = uniform_index(heads[0], rng);
  const int f = uniform_index(heads[1], rng);
  return {v, f};
}

GripperAction random_gripper(const EnvConfig& cfg, std::mt19937_64& rng) {
  const auto heads = nbp_heads(cfg);
  const int t = uniform_index(heads[0], rng);
  const int y = uniform_index(heads[1], rng);
  const int d = uniform_index(2, rng);
  return {t, y, d == 1};
}

CameraAction select_nbv(const QNetwork& net, const ObsFeatures& x, double epsilon,
                        const EnvConfig& cfg, std::mt19937_64& rng) {
  if (explore(epsilon, rng)) return random_camera(cfg, rng);
  const Eigen::VectorXd out = evaluate(net, x);
  return argmax_camera(head(out, net, 0), head(out, net, 1));
}

GripperAction select_nbp(const QNetwork& net, const ObsFeatures& x, double epsilon,
                         const EnvConfig& cfg, std::mt19937_64& rng) {
  if (explore(epsilon, rng)) return random_gripper(cfg, rng);
  const Eigen::VectorXd out = evaluate(net, x);
  return argmax_gripper(head(out, net, 0), head(out, net, 1), head(out, net, 2));
}

ReplayBuffer::ReplayBuffer(std::size_t online_capacity) : capacity_(online_capacity) {
  if (capacity_ == 0) throw std::invalid_argument("online capacity must be positive");
}

void ReplayBuffer::add_demo(Transition t) { demo_.push_back(std::move(t)); }

void ReplayBuffer::add_online(Transition t) {
  if (online_.size() == capacity_) online_.pop_front();
  online_.push_back(std::move(t));
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i < demo_.size()) return demo_[i];
  return online_.at(i - demo_.size());
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t batch,
                                                    std::mt19937_64& rng) const {
  if (size() == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> dist(0, size() - 1);
  std::vector<const Transition*> out(batch);
  for (auto& p : out) p = &at(dist(rng));
  return out;
}

TdTargets td_targets(std::span<const Transition* const> batch, const DualAgent& target,
                     double gamma) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  const Eigen::MatrixXd q_v = target.nbv.forward(stack(batch, &Transition::next_nbv));
  const Eigen::MatrixXd q_p = target.nbp.forward(stack(batch, &Transition::next_nbp));
  TdTargets y{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    const double keep = t.terminal ? 0.0 : gamma;
    double best_v = 0.0;
    for (std::size_t h = 0; h < target.nbv.heads().size(); ++h) {
      best_v += max_of(q_v.col(i).data() + target.nbv.head_offset(h), target.nbv.heads()[h]);
    }
    double best_p = 0.0;
    for (std::size_t h = 0; h < target.nbp.heads().size(); ++h) {
      best_p += max_of(q_p.col(i).data() + target.nbp.head_offset(h), target.nbp.heads()[h]);
    }
    y.nbv[i] = t.rewards.r_nbv + keep * best_v;
    y.nbp[i] = t.rewards.r_nbp + keep * best_p;
  }
  return y;
}

TdResult td_update(std::span<const Transition* const> batch, DualAgent& online,
                   const DualAgent& target, Adam& nbv_opt, Adam& nbp_opt,
                   const TrainerConfig& cfg, Exec exec) {
  if (batch.empty()) throw std::invalid_argument("td_update needs a nonempty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const TdTargets y = td_targets(batch, target, cfg.gamma);

  QRegressionBatch bv{stack(batch, &Transition::nbv), Eigen::MatrixXi(2, n), y.nbv};
  QRegressionBatch bp{stack(batch, &Transition::nbp), Eigen::MatrixXi(3, n), y.nbp};
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    bv.actions(0, i) = t.camera.view_bin;
    bv.actions(1, i) = t.camera.roi_bin;
    bp.actions(0, i) = t.gripper.translation_bin;
    bp.actions(1, i) = t.gripper.yaw_bin;
    bp.actions(2, i) = t.gripper.closed ? 1 : 0;
  }
  // Reused across calls: fresh multi-megabyte buffers fault in pages every update.
  thread_local Gradients gv;
  thread_local Gradients gp;
  TdResult r;
  r.nbv_loss = q_regression_gradient(online.nbv, bv, gv, exec, cfg.chunk);
  r.nbp_loss = q_regression_gradient(online.nbp, bp, gp, exec, cfg.chunk);
  r.loss = r.nbv_loss + r.nbp_loss;
  if (!std::isfinite(r.loss)) {
    std::ostringstream msg;
    msg << "non-finite TD loss (nbv " << r.nbv_loss << ", nbp " << r.nbp_loss
        << ") after " << nbv_opt.steps() << " updates";
    throw std::runtime_error(msg.str());
  }
  nbv_opt.step(online.nbv, gv);
  nbp_opt.step(online.nbp, gp);
  return r;
}

EpisodeOutcome run_episode(Environment& env, SceneObservation obs, const DualAgent& agent,
                           PolicyKind kind, double epsilon, std::mt19937_64& rng) {
  const EnvConfig& cfg = env.config();
  if (!env.episode_active()) throw std::logic_error("run_episode needs a freshly reset env");
  for (;;) {
    const ObsFeatures xv = nbv_features(obs, cfg);
    CameraAction a_c;
    switch (kind) {
      case PolicyKind::kGreedy:
        a_c = select_nbv(agent.nbv, xv, epsilon, cfg, rng);
        break;
      case PolicyKind::kRandomView:
        a_c = random_camera(cfg, rng);
        break;
      case PolicyKind::kStaticCamera: {
        a_c = select_nbv(agent.nbv, xv, epsilon, cfg, rng);
        Viewpoint rel = obs.viewpoint;
        rel.phi = wrap_angle(rel.phi - obs.frame_phi);
        a_c.view_bin = env.view_bins().discretize(rel);
        break;
      }
    }
    const CameraStepResult cam = env.step_camera(a_c);
    const GripperAction a_g =
        select_nbp(agent.nbp, nbp_features(cam.observation, cfg), epsilon, cfg, rng);
    GripperStepResult step = env.step_gripper(a_g);
    if (step.done) return *step.outcome;
    obs = std::move(step.next);
  }
}

Trainer::Trainer(EnvConfig env_cfg, TrainerConfig cfg, Task task, std::uint64_t seed)
    : env_cfg_(std::move(env_cfg)),
      cfg_(std::move(cfg)),
      task_(task),
      seed_(seed),
      env_(env_cfg_),
      replay_(static_cast<std::size_t>(std::max(1, cfg_.online_capacity))),
      rng_(derive_seed(seed, SeedStream::kSampler, 0)) {
  cfg_.validate();
  online_ = DualAgent::make(env_cfg_, cfg_.hidden, seed_);
  target_ = online_;
  nbv_opt_ = Adam(online_.nbv, cfg_.learning_rate);
  nbp_opt_ = Adam(online_.nbp, cfg_.learning_rate);
}

void Trainer::env_step(double epsilon) {
  if (need_reset_) {
    const std::uint64_t s = derive_seed(seed_, SeedStream::kTrainEpisode, episode_index_++);
    current_ = nbv_features(env_.reset(task_, s), env_cfg_);
    need_reset_ = false;
  }
  Transition t;
  t.nbv = current_;
  t.camera = select_nbv(online_.nbv, t.nbv, epsilon, env_cfg_, rng_);
  const CameraStepResult cam = env_.step_camera(t.camera);
  t.nbp = nbp_features(cam.observation, env_cfg_);
  t.gripper = select_nbp(online_.nbp, t.nbp, epsilon, env_cfg_, rng_);
  const GripperStepResult step = env_.step_gripper(t.gripper);
  t.next_nbv = nbv_features(step.next, env_cfg_);
  t.next_nbp = with_proprio(t.nbp, step.next_roi, env_cfg_);
  t.rewards = step.rewards;
  t.terminal = step.terminal;
  current_ = t.next_nbv;
  replay_.add_online(std::move(t));
  if (step.done) {
    need_reset_ = true;
    ++counts_.episodes;
    switch (step.outcome->kind) {
      case OutcomeKind::kSuccess: ++counts_.successes; break;
      case OutcomeKind::kTimeout: ++counts_.timeouts; break;
      case OutcomeKind::kExecutionFailure: ++counts_.failures; break;
    }
  }
}

void Trainer::run(const std::function<void(const TrainingRow&)>& on_row) {
  for (int u = 0; u < cfg_.updates; ++u) {
    const double eps = cfg_.epsilon(u);
    if (u >= cfg_.pretrain_updates) {
      for (int k = 0; k < cfg_.env_steps_per_update; ++k) env_step(eps);
    }
    if (replay_.size() == 0) throw std::logic_error("no transitions to train on");
    const auto batch = replay_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
    const TdResult r = td_update(batch, online_, target_, nbv_opt_, nbp_opt_, cfg_);
    if ((u + 1) % cfg_.target_sync == 0) target_ = online_;
    TrainingRow row = counts_;
    row.update = u + 1;
    row.loss = r.loss;
    row.nbv_loss = r.nbv_loss;
    row.nbp_loss = r.nbp_loss;
    row.epsilon = eps;
    log_.push_back(row);
    if (on_row) on_row(row);
  }
}

}  // namespace avam
