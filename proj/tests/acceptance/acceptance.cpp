// Acceptance suite: one PASS/FAIL line per criterion. The learning runs
// (criteria 11 and 12) go through the same gen-demos/train/eval code as the
// CLI and take tens of minutes on one core.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "avam/commands.hpp"
#include "avam/kernels.hpp"
#include "avam/rng.hpp"
#include "oracles.hpp"

namespace {

using namespace avam;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

template <typename T>
bool same_bytes(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

bool same_grid(const VoxelGrid& a, const VoxelGrid& b) {
  return a.spec == b.spec && a.occupied == b.occupied && same_bytes(a.centroid, b.centroid) &&
         same_bytes(a.feature, b.feature);
}

Verdict geometry_round_trip() {
  std::mt19937_64 rng(1);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 p = oracle::uniform_vec(rng, Vec3::Constant(-2), Vec3::Constant(2));
    const double phi = oracle::uniform(rng, -kTwoPi, 2 * kTwoPi);
    const Vec3 local = align_points(std::span<const Vec3>(&p, 1), phi)[0];
    const WorldTargets w = inverse_align(Viewpoint{}, local, GripperPose{}, phi);
    worst = std::max(worst, (w.roi_center - p).cwiseAbs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 1.0, fmt("max error %.3g, %.3f s", worst, t)};
}

Verdict voxelizer_oracle() {
  std::mt19937_64 rng(2);
  const auto t0 = Clock::now();
  int mismatched = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    GridSpec spec;
    spec.dims = 16;
    spec.resolution = oracle::uniform(rng, 0.01, 0.08);
    spec.center = oracle::uniform_vec(rng, Vec3::Constant(-0.5), Vec3::Constant(0.5));
    const int n = std::uniform_int_distribution<int>(1, 1000)(rng);
    const PointCloud pc = oracle::random_cloud(rng, spec, n);
    const VoxelGrid got = voxelize(pc, spec);
    const VoxelGrid want = oracle::naive_voxelize(pc, spec);
    if (got.occupied != want.occupied) ++mismatched;
    for (std::size_t v = 0; v < got.size(); ++v) {
      if (!want.occupied[v]) continue;
      worst = std::max(worst, (got.centroid[v] - want.centroid[v]).cwiseAbs().maxCoeff());
      worst = std::max(worst, (got.feature[v] - want.feature[v]).cwiseAbs().maxCoeff());
    }
  }
  const double t = seconds_since(t0);
  return {mismatched == 0 && worst <= 1e-12 && t < 30.0,
          fmt("%d occupancy mismatches, max centroid/feature error %.3g, %.2f s", mismatched,
              worst, t)};
}

Verdict visibility_oracle() {
  std::mt19937_64 rng(3);
  long mismatches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    GridSpec spec;
    spec.center = Vec3(0, 0, 0.375);
    const VoxelGrid grid = oracle::random_occupancy(rng, spec);
    const Vec3 cam = oracle::random_outside_camera(rng, spec);
    const auto got = label_visibility(grid, cam).labels;
    const auto want = oracle::continuous_visibility(grid, cam);
    for (std::size_t i = 0; i < got.size(); ++i) mismatches += got[i] != want[i];
  }
  return {mismatches == 0, fmt("%ld label mismatches over 50 scenes", mismatches)};
}

Verdict entropy_identities() {
  bool ok = voxel_entropy(0.5) == 1.0 && voxel_entropy(0.0) == 0.0 && voxel_entropy(1.0) == 0.0;
  std::mt19937_64 rng(4);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    GridSpec spec;
    spec.dims = std::uniform_int_distribution<int>(2, 16)(rng);
    const VoxelGrid grid = oracle::random_occupancy(rng, spec);
    const ObservedGrid og = label_visibility(grid, oracle::random_outside_camera(rng, spec));
    const auto occluded = std::count(og.labels.begin(), og.labels.end(), Visibility::kOccluded);
    if (roi_entropy(og) != static_cast<double>(occluded) / og.labels.size()) ++bad;
  }
  return {ok && bad == 0, fmt("point identities %s, %d of 100 grids differ from the occluded fraction",
                              ok ? "hold" : "FAIL", bad)};
}

Verdict reward_table() {
  const bool table = interaction_reward(RoiStatus::kReachableNonEmpty) == 0.02 &&
                     interaction_reward(RoiStatus::kReachableEmpty) == 0.0 &&
                     interaction_reward(RoiStatus::kUnreachable) == -0.02;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double task = (rng() % 2) ? 1.0 : 0.0;
    const double ri = oracle::uniform(rng, -0.02, 0.02);
    const double re = oracle::uniform(rng, -1.0, 1.0);
    const RewardBundle b = compose_rewards(task, ri, re);
    worst = std::max(worst, std::abs((b.r_nbv - b.r_nbp) - re));
  }
  return {table && worst <= 1e-15,
          fmt("table %s, max |r_nbv - r_nbp - r_e| = %.3g", table ? "exact" : "WRONG", worst)};
}

DemoTrajectory frames_from(const std::vector<double>& phis, const std::vector<Vec3>& positions,
                           const std::vector<double>& closures) {
  DemoTrajectory t;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    GripperPose g;
    g.position = positions[i];
    g.closure = closures[i];
    t.frames.push_back(
        {static_cast<int>(i), Viewpoint::make(1.2, deg2rad(55), deg2rad(phis[i])), g});
  }
  return t;
}

bool hand_fixtures_match() {
  // Camera settles at frame 2; gripper moves over 3..7 and closes at 7.
  std::vector<Vec3> pos;
  for (int i = 0; i < 8; ++i) pos.push_back(Vec3(0, 0, 0.4 - 0.05 * std::max(0, i - 2)));
  std::vector<double> cl(8, 0.08);
  cl[7] = 0.0;
  const KeyframeSet one = discover_keyframes(frames_from({0, 30, 60, 60, 60, 60, 60, 60}, pos, cl));
  // Two phases: camera 0->2, gripper stops at 6; camera 7->9, gripper closes at 13.
  std::vector<double> phis;
  std::vector<Vec3> pos2;
  for (int i = 0; i < 15; ++i) {
    phis.push_back(i == 0 ? 0 : i == 1 ? 30 : i == 8 ? 90 : i >= 9 ? 120 : 60);
    double z = 0.4;
    if (i >= 3) z -= 0.05 * (std::min(i, 6) - 2);
    const double x = i >= 11 ? 0.05 * (std::min(i, 13) - 10) : 0.0;
    pos2.push_back(Vec3(x, 0, z));
  }
  std::vector<double> cl2(15, 0.08);
  for (int i = 13; i < 15; ++i) cl2[i] = 0.0;
  const KeyframeSet two = discover_keyframes(frames_from(phis, pos2, cl2));
  return one.pairs() == std::vector<KeyframePair>{{2, 7}} &&
         two.pairs() == std::vector<KeyframePair>{{2, 6}, {9, 13}};
}

Verdict keyframe_chain() {
  const EnvConfig cfg;
  int broken = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const DemoTrajectory t =
        scripted_demo(cfg, Task::kHiddenReach, derive_seed(6, SeedStream::kDemo, s),
                      1 + static_cast<int>(s % 6), static_cast<int>(s % 4));
    const KeyframeSet k = discover_keyframes(t);
    int prev = 0;
    for (const auto& p : k.pairs()) {
      if (!(prev <= p.camera && p.camera <= p.gripper && p.gripper <= t.size() - 1)) ++broken;
      prev = p.gripper;
    }
  }
  const bool fixtures = hand_fixtures_match();
  return {broken == 0 && fixtures, fmt("%d chain violations over 100 demos, fixtures %s", broken,
                                       fixtures ? "match" : "DIFFER")};
}

bool same_transition(const DemoTransition& a, const DemoTransition& b) {
  return a.segment == b.segment && a.start_frame == b.start_frame &&
         a.mid_frame == b.mid_frame && same_grid(a.obs.grid, b.obs.grid) &&
         a.camera == b.camera && same_grid(a.roi.grid, b.roi.grid) &&
         a.roi.labels == b.roi.labels && a.gripper == b.gripper &&
         same_grid(a.next.grid, b.next.grid) && a.rewards.r_nbv == b.rewards.r_nbv &&
         a.rewards.r_nbp == b.rewards.r_nbp && a.terminal == b.terminal &&
         a.success == b.success;
}

Verdict augmentation() {
  const EnvConfig cfg;
  Environment env(cfg);
  const DemoTrajectory t = scripted_demo(cfg, Task::kHiddenReach, 7);
  const KeyframeSet flat({{0, 0}}, t.size());
  const auto raw = build_raw_transitions(env, t, flat);
  bool identical = true;
  for (const auto& a : augment_transitions(env, t, flat, 70, 5)) {
    identical = identical && same_transition(a, raw[0]);
  }

  const KeyframeSet k({{1, 2}, {6, 9}, {9, 14}}, 15);
  const auto idx = sample_augmented_indices(k, 71, 10000);
  double min_p = 1.0;
  for (int seg = 0; seg < k.size(); ++seg) {
    const int s0 = k.segment_start(seg);
    std::vector<long> start(k[seg].camera - s0 + 1, 0);
    std::vector<long> mid(k[seg].gripper - k[seg].camera + 1, 0);
    for (const auto& a : idx) {
      if (a.segment != seg) continue;
      ++start.at(a.start - s0);
      ++mid.at(a.mid - k[seg].camera);
    }
    if (start.size() > 1) min_p = std::min(min_p, oracle::chi_squared_uniform_p(start));
    if (mid.size() > 1) min_p = std::min(min_p, oracle::chi_squared_uniform_p(mid));
  }
  return {identical && min_p > 0.01,
          fmt("width-0 copies %s, smallest chi-squared p = %.3f", identical ? "exact" : "DIFFER",
              min_p)};
}

double forward_loss(const QNetwork& net, const QRegressionBatch& batch) {
  const Eigen::MatrixXd out = net.forward(batch.inputs);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < out.cols(); ++i) {
    double q = 0.0;
    for (int h = 0; h < static_cast<int>(net.heads().size()); ++h) {
      q += out(net.head_offset(h) + batch.actions(h, i), i);
    }
    loss += (q - batch.targets[i]) * (q - batch.targets[i]);
  }
  return loss / static_cast<double>(out.cols());
}

Verdict gradient_check() {
  std::mt19937_64 rng(8);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> hidden(pick(0, 2));
    for (auto& w : hidden) w = pick(1, 6);
    std::vector<int> heads(pick(1, 3));
    for (auto& w : heads) w = pick(1, 4);
    QNetwork net(pick(1, 6), hidden, heads);
    std::vector<double> p(net.parameter_count());
    for (auto& v : p) v = oracle::uniform(rng, -1, 1);
    net.set_flat(p);
    const int b = pick(1, 8);
    QRegressionBatch batch{Eigen::MatrixXd(net.input_size(), b),
                           Eigen::MatrixXi(static_cast<int>(heads.size()), b), Eigen::VectorXd(b)};
    for (Eigen::Index i = 0; i < batch.inputs.size(); ++i) {
      batch.inputs.data()[i] = oracle::uniform(rng, -1, 1);
    }
    for (int hd = 0; hd < static_cast<int>(heads.size()); ++hd) {
      for (int i = 0; i < b; ++i) batch.actions(hd, i) = pick(0, heads[hd] - 1);
    }
    for (int i = 0; i < b; ++i) batch.targets[i] = oracle::uniform(rng, -1, 1);

    Gradients g = Gradients::zeros_like(net);
    q_regression_gradient(net, batch, g, Exec::kParallel, 3);
    const auto analytic = g.flat();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double keep = p[k];
      p[k] = keep + h;
      net.set_flat(p);
      const double up = forward_loss(net, batch);
      p[k] = keep - h;
      net.set_flat(p);
      const double down = forward_loss(net, batch);
      p[k] = keep;
      net.set_flat(p);
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(analytic[k]), 1e-6});
      worst = std::max(worst, std::abs(numeric - analytic[k]) / scale);
    }
  }
  return {worst < 1e-4, fmt("max relative error %.3g", worst)};
}

Verdict alignment_invariance() {
  const EnvConfig cfg;
  Environment env(cfg);
  int differing = 0;
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SceneSpec scene = generate_scene(Task::kHiddenReach, seed, cfg);
    for (double phi0 : {0.0, 30.0, 75.0}) {
      EnvState st;
      st.viewpoint = Viewpoint::make(cfg.view_radius, deg2rad(35), deg2rad(phi0));
      st.gripper = cfg.home_pose();
      const SceneObservation base = env.restore(scene, st);
      const CameraStepResult base_cam = env.step_camera(CameraAction{17, 300});
      for (int q = 1; q < 4; ++q) {
        EnvState rs = st;
        rs.viewpoint = Viewpoint::make(cfg.view_radius, deg2rad(35), deg2rad(phi0 + 90 * q));
        const SceneObservation rot = env.restore(rotate_scene_quarter_turns(scene, q), rs);
        const CameraStepResult rot_cam = env.step_camera(CameraAction{17, 300});
        ++compared;
        if (!same_grid(base.grid, rot.grid) ||
            !same_grid(base_cam.observation.grid, rot_cam.observation.grid) ||
            base_cam.observation.labels != rot_cam.observation.labels) {
          ++differing;
        }
      }
    }
  }
  return {differing == 0, fmt("%d of %d rotated observations differ", differing, compared)};
}

struct SeedRun {
  std::uint64_t seed = 0;
  double seconds = 0.0;
  EvalResult greedy;
  EvalResult random;
  fs::path checkpoint;
};

SeedRun learn(const RunConfig& base, std::uint64_t seed, const fs::path& dir) {
  RunConfig cfg = base;
  cfg.seed = seed;
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = Clock::now();
  const GenDemosResult demos = cmd_gen_demos(cfg, dir / "demos");
  if (demos.written != cfg.demo.count) throw std::runtime_error("demo generation fell short");
  const TrainResult tr = cmd_train(cfg, dir / "demos", dir / "train");
  SeedRun r;
  r.seed = seed;
  r.checkpoint = tr.checkpoint;
  r.greedy = cmd_eval(tr.checkpoint, cfg, 100, PolicyKind::kGreedy, dir / "eval");
  r.random = cmd_eval(tr.checkpoint, cfg, 100, PolicyKind::kRandomView, dir / "eval");
  r.seconds = seconds_since(t0);
  std::printf("  seed %llu: greedy SR %.2f (ASSIG %.3f, AIIG %.3f), random-view SR %.2f, %.0f s\n",
              static_cast<unsigned long long>(seed), r.greedy.report.sr,
              r.greedy.report.assig.avg, r.greedy.report.aiig.value_or(GainStats{}).avg,
              r.random.report.sr, r.seconds);
  std::fflush(stdout);
  return r;
}

double mean_sr(const std::vector<SeedRun>& runs, bool greedy) {
  double s = 0.0;
  for (const auto& r : runs) s += (greedy ? r.greedy : r.random).report.sr;
  return s / runs.size();
}

Verdict static_camera(const fs::path& checkpoint, const RunConfig& cfg, const fs::path& dir,
                      EvalResult& r) {
  r = cmd_eval(checkpoint, cfg, 20, PolicyKind::kStaticCamera, dir);
  return {r.report.assig.avg == 0.0 && r.report.assig.max == 0.0,
          fmt("ASSIG avg %.17g, max %.17g over 20 episodes", r.report.assig.avg,
              r.report.assig.max)};
}

double report_gap(const MetricsReport& a, const MetricsReport& b) {
  double gap = 0.0;
  auto upd = [&](double x, double y) { gap = std::max(gap, std::abs(x - y)); };
  upd(a.episodes, b.episodes);
  upd(a.sr, b.sr);
  upd(a.to, b.to);
  upd(a.ef, b.ef);
  upd(a.el.mean, b.el.mean);
  upd(a.el.std, b.el.std);
  upd(a.fi.mean, b.fi.mean);
  upd(a.fi.std, b.fi.std);
  upd(a.ni.mean, b.ni.mean);
  upd(a.ni.std, b.ni.std);
  upd(a.assig.avg, b.assig.avg);
  upd(a.assig.max, b.assig.max);
  if (a.aiig.has_value() != b.aiig.has_value()) return 1.0;
  if (a.aiig) {
    upd(a.aiig->avg, b.aiig->avg);
    upd(a.aiig->max, b.aiig->max);
  }
  return gap;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work =
      argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "avam_acceptance";
  std::map<int, std::pair<std::string, Verdict>> results;
  auto record = [&](int id, const std::string& name, Verdict v) {
    std::printf("  [%d] %s: %s\n", id, v.pass ? "pass" : "fail", v.detail.c_str());
    std::fflush(stdout);
    results[id] = {name, std::move(v)};
  };

  record(1, "geometry round trip", geometry_round_trip());
  record(2, "voxelizer oracle", voxelizer_oracle());
  record(3, "visibility oracle", visibility_oracle());
  record(4, "entropy identities", entropy_identities());
  record(5, "reward table", reward_table());
  record(6, "keyframe chain", keyframe_chain());
  record(7, "augmentation", augmentation());
  record(8, "gradient check", gradient_check());
  record(9, "alignment invariance", alignment_invariance());

  const RunConfig on;
  RunConfig off = on;
  off.toggles = Toggles{false, false, false};
  std::vector<SeedRun> runs_on;
  std::vector<SeedRun> runs_off;
  std::printf("learning runs, all toggles on (%d updates, %d demos):\n", on.trainer.updates,
              on.demo.count);
  for (std::uint64_t s = 0; s < 3; ++s) {
    runs_on.push_back(learn(on, s, work / ("on_seed" + std::to_string(s))));
  }
  std::printf("learning runs, align/aug/aux off:\n");
  for (std::uint64_t s = 0; s < 3; ++s) {
    runs_off.push_back(learn(off, s, work / ("off_seed" + std::to_string(s))));
  }

  EvalResult static_eval;
  record(10, "static-camera sanity",
         static_camera(runs_on[0].checkpoint, on, work / "static", static_eval));

  {
    const double sr = mean_sr(runs_on, true);
    const double rnd = mean_sr(runs_on, false);
    double assig = 0.0;
    double aiig = 0.0;
    double slowest = 0.0;
    for (const auto& r : runs_on) {
      assig += r.greedy.report.assig.avg / runs_on.size();
      aiig += r.greedy.report.aiig.value_or(GainStats{}).avg / runs_on.size();
      slowest = std::max(slowest, r.seconds);
    }
    const bool pass = on.trainer.updates <= 20000 && sr >= 0.6 && sr >= 2.0 * rnd &&
                      assig > 0.0 && aiig > 0.0 && slowest <= 900.0;
    record(11, "learning efficacy",
           {pass, fmt("mean greedy SR %.3f vs random-view %.3f, ASSIG %.3f, AIIG %.3f, "
                      "slowest seed %.0f s",
                      sr, rnd, assig, aiig, slowest)});
  }
  {
    const double a = mean_sr(runs_on, true);
    const double b = mean_sr(runs_off, true);
    record(12, "ablation direction",
           {b < a, fmt("mean SR all-off %.3f vs all-on %.3f", b, a)});
  }
  {
    std::vector<const EvalResult*> evals{&static_eval};
    for (const auto* runs : {&runs_on, &runs_off}) {
      for (const auto& r : *runs) {
        evals.push_back(&r.greedy);
        evals.push_back(&r.random);
      }
    }
    double gap = 0.0;
    for (const EvalResult* e : evals) {
      const auto rows = cmd_metrics({e->log});
      gap = rows.size() == 1 ? std::max(gap, report_gap(rows[0].second, e->report)) : 1.0;
    }
    record(13, "dual-path metrics",
           {gap <= 1e-12, fmt("max |recomputed - eval-time| = %.3g over %zu logs", gap,
                              evals.size())});
  }

  std::printf("\n");
  int failed = 0;
  for (const auto& [id, entry] : results) {
    std::printf("criterion %2d %-22s %s  (%s)\n", id, entry.first.c_str(),
                entry.second.pass ? "PASS" : "FAIL", entry.second.detail.c_str());
    failed += !entry.second.pass;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
