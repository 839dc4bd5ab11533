#include "avam/commands.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "avam/rng.hpp"

namespace avam {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw std::runtime_error("cannot create directory " + dir.string());
  }
}

std::string demo_file_name(int index) {
  std::ostringstream name;
  name << "demo_" << std::setw(3) << std::setfill('0') << index << ".jsonl";
  return name.str();
}

}  // namespace

std::uint64_t demo_config_hash(const RunConfig& cfg) {
  const json j = to_json(cfg);
  return fnv1a(json{{"task", j["task"]}, {"env", j["env"]}, {"demo", j["demo"]}}.dump());
}

GenDemosResult cmd_gen_demos(const RunConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  make_dir(out_dir);
  const EnvConfig env = cfg.effective_env();
  const std::string hash = hash_hex(config_hash(cfg));
  GenDemosResult result;
  json entries = json::array();
  json failures = json::array();
  for (int d = 0; d < cfg.demo.count; ++d) {
    const std::uint64_t seed = derive_seed(cfg.seed, SeedStream::kDemo, d);
    DemoFile demo;
    demo.config_hash = hash;
    demo.index = d;
    try {
      demo.traj = scripted_demo(env, cfg.task, seed);
      demo.keyframes = discover_keyframes(demo.traj, cfg.demo.thresholds);
    } catch (const std::exception& e) {
      result.failures.push_back("demo " + std::to_string(d) + ": " + e.what());
      failures.push_back({{"index", d}, {"seed", seed}, {"error", e.what()}});
      continue;
    }
    const std::string name = demo_file_name(d);
    std::ofstream out = open_out(out_dir / name);
    write_demo(out, demo);
    if (!out) throw std::runtime_error("failed writing " + (out_dir / name).string());
    entries.push_back({{"file", name},
                       {"index", d},
                       {"seed", seed},
                       {"frames", demo.traj.size()},
                       {"keyframes", demo.keyframes.size()}});
    ++result.written;
  }
  const json manifest{{"format", kLogFormat},
                      {"config_hash", hash},
                      {"demo_hash", hash_hex(demo_config_hash(cfg))},
                      {"seed", cfg.seed},
                      {"task", to_string(cfg.task)},
                      {"count", result.written},
                      {"demos", entries},
                      {"failures", failures}};
  std::ofstream out = open_out(out_dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing manifest");
  return result;
}

IngestResult ingest_demos(const RunConfig& cfg, const fs::path& demo_dir, Trainer& trainer) {
  const fs::path manifest_path = demo_dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw std::runtime_error("missing demos: no manifest in " + demo_dir.string());
  }
  json manifest;
  try {
    std::ifstream in = open_in(manifest_path);
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string(), 0, e.what());
  }
  const std::string expected = hash_hex(demo_config_hash(cfg));
  if (manifest.value("demo_hash", std::string()) != expected) {
    throw ConfigError("demos in " + demo_dir.string() + " were generated under another config");
  }
  const EnvConfig env_cfg = cfg.effective_env();
  Environment env(env_cfg);
  IngestResult result;
  for (const auto& entry : manifest.at("demos")) {
    const fs::path path = demo_dir / entry.at("file").get<std::string>();
    std::ifstream in = open_in(path);
    const DemoFile demo = read_demo(in, path.string());
    const KeyframeSet kfs = discover_keyframes(demo.traj, cfg.demo.thresholds);
    for (const auto& t : build_raw_transitions(env, demo.traj, kfs)) {
      trainer.add_demo(to_features(t, env_cfg));
      ++result.raw;
    }
    if (cfg.toggles.aug) {
      const std::uint64_t seed = derive_seed(cfg.seed, SeedStream::kAugment, demo.index);
      for (const auto& t :
           augment_transitions(env, demo.traj, kfs, seed, cfg.demo.augment_per_segment)) {
        trainer.add_demo(to_features(t, env_cfg));
        ++result.augmented;
      }
    }
  }
  return result;
}

TrainResult cmd_train(const RunConfig& cfg, const fs::path& demo_dir, const fs::path& out_dir,
                      const std::function<void(const TrainingRow&)>& on_row) {
  cfg.validate();
  make_dir(out_dir);
  Trainer trainer(cfg.effective_env(), cfg.trainer, cfg.task, cfg.seed);
  TrainResult result;
  if (!demo_dir.empty()) result.ingest = ingest_demos(cfg, demo_dir, trainer);

  result.log = out_dir / "training.csv";
  std::ofstream log = open_out(result.log);
  write_training_header(log);
  trainer.run([&](const TrainingRow& row) {
    write_training_row(log, row);
    if (on_row) on_row(row);
  });
  if (!log) throw std::runtime_error("failed writing " + result.log.string());

  result.checkpoint = out_dir / "checkpoint.bin";
  save_checkpoint(result.checkpoint.string(), Checkpoint{config_hash(cfg), trainer.agent()});
  std::ofstream config = open_out(out_dir / "config.json");
  config << to_json(cfg).dump(2) << '\n';
  return result;
}

std::string policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kGreedy: return "greedy";
    case PolicyKind::kRandomView: return "random-view";
    case PolicyKind::kStaticCamera: return "static-camera";
  }
  return "unknown";
}

EvalResult cmd_eval(const fs::path& checkpoint, const RunConfig& cfg, int episodes,
                    PolicyKind policy, const fs::path& out_dir) {
  cfg.validate();
  if (episodes < 1) throw ConfigError("eval needs at least one episode");
  const Checkpoint ckpt = load_checkpoint(checkpoint.string());
  if (ckpt.config_hash != config_hash(cfg)) {
    throw ConfigError("checkpoint config hash " + hash_hex(ckpt.config_hash) +
                      " does not match config hash " + hash_hex(config_hash(cfg)));
  }
  make_dir(out_dir);
  const EnvConfig env_cfg = cfg.effective_env();
  Environment env(env_cfg);
  std::vector<LoggedEpisode> logged;
  std::vector<EpisodeRecord> records;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t seed = derive_seed(cfg.seed, SeedStream::kEvalEpisode, e);
    std::mt19937_64 rng(derive_seed(seed, SeedStream::kSampler, 0));
    const SceneObservation obs = env.reset(cfg.task, seed);
    EpisodeOutcome out = run_episode(env, obs, ckpt.agent, policy, 0.0, rng);
    records.push_back(EpisodeRecord::from(out, env_cfg.max_steps));
    logged.push_back({seed, std::move(out)});
  }

  EvalResult result;
  result.report = episode_stats(records);
  const std::string name = policy_name(policy);
  result.log = out_dir / ("episodes_" + name + ".jsonl");
  std::ofstream log = open_out(result.log);
  write_episode_log(log, {hash_hex(config_hash(cfg)), cfg.seed, name, env_cfg.max_steps, true},
                    logged);
  if (!log) throw std::runtime_error("failed writing " + result.log.string());
  result.report_csv = out_dir / ("report_" + name + ".csv");
  std::ofstream csv = open_out(result.report_csv);
  write_report_header(csv);
  write_report_row(csv, name, result.report);
  return result;
}

std::vector<std::pair<std::string, MetricsReport>> cmd_metrics(const std::vector<fs::path>& logs) {
  if (logs.empty()) throw std::invalid_argument("metrics needs at least one log");
  std::vector<std::string> order;
  std::map<std::string, std::vector<EpisodeRecord>> by_policy;
  std::map<std::string, bool> movable;
  for (const auto& path : logs) {
    std::ifstream in = open_in(path);
    for (auto& section : read_episode_logs(in, path.string())) {
      const std::string& policy = section.header.policy;
      if (!by_policy.count(policy)) {
        order.push_back(policy);
        movable[policy] = true;
      }
      movable[policy] = movable[policy] && section.header.movable_camera;
      auto& dst = by_policy[policy];
      dst.insert(dst.end(), section.episodes.begin(), section.episodes.end());
    }
  }
  std::vector<std::pair<std::string, MetricsReport>> out;
  for (const auto& policy : order) {
    if (by_policy[policy].empty()) continue;
    out.emplace_back(policy, episode_stats(by_policy[policy], movable[policy]));
  }
  if (out.empty()) throw std::invalid_argument("logs contain no episodes");
  return out;
}

void cmd_inspect(const fs::path& path, std::ostream& out) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw std::runtime_error("cannot open " + path.string());
  char magic[8] = {};
  probe.read(magic, sizeof(magic));
  if (probe.gcount() == 8 && std::string(magic, 8) == "AVAMCKPT") {
    const Checkpoint ckpt = load_checkpoint(path.string());
    out << "checkpoint " << path.string() << "\n  config hash " << hash_hex(ckpt.config_hash)
        << '\n';
    for (const auto* net : {&ckpt.agent.nbv, &ckpt.agent.nbp}) {
      out << "  " << (net == &ckpt.agent.nbv ? "nbv" : "nbp") << ": input " << net->input_size()
          << ", hidden";
      for (int h : net->hidden()) out << ' ' << h;
      out << ", heads";
      for (int h : net->heads()) out << ' ' << h;
      out << ", " << net->parameter_count() << " parameters\n";
    }
    return;
  }

  if (path.extension() == ".json") {
    std::ifstream in = open_in(path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(path.string(), 0, e.what());
    }
    if (j.contains("demos")) {
      out << "demo manifest " << path.string() << "\n  task " << j.value("task", "?")
          << ", seed " << j.value("seed", std::uint64_t{0}) << ", " << j.at("demos").size()
          << " demos, " << j.value("failures", json::array()).size() << " failures\n";
    } else {
      const RunConfig cfg = run_config_from_json(j);
      out << "config " << path.string() << "\n  hash " << hash_hex(config_hash(cfg)) << '\n'
          << to_json(cfg).dump(2) << '\n';
    }
    return;
  }

  std::ifstream in = open_in(path);
  std::string first;
  std::getline(in, first);
  json header;
  try {
    header = json::parse(first);
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, e.what());
  }
  in.clear();
  in.seekg(0);
  if (header.contains("policy")) {
    for (const auto& section : read_episode_logs(in, path.string())) {
      const MetricsReport r = episode_stats(section.episodes, section.header.movable_camera);
      out << "episode log " << path.string() << " (" << section.header.policy << ", config "
          << section.header.config_hash << ")\n  " << r.episodes << " episodes, SR " << r.sr
          << ", TO " << r.to << ", EF " << r.ef << ", EL " << r.el.mean << '\n';
    }
    return;
  }
  const DemoFile demo = read_demo(in, path.string());
  out << "demo " << path.string() << " (" << to_string(demo.traj.task) << ", seed "
      << demo.traj.seed << ", config " << demo.config_hash << ")\n  " << demo.traj.size()
      << " frames at " << demo.traj.rate_hz << " Hz, keyframes";
  for (const auto& p : demo.keyframes.pairs()) out << " (" << p.camera << ',' << p.gripper << ')';
  out << "\n  scene: " << demo.traj.scene.solids.size() << " solids, goal ("
      << demo.traj.scene.goal.transpose() << ")\n";
}

}  // namespace avam
