#include "avam/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <vector>

namespace avam {

using nlohmann::json;

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

// Reads the members of one JSON object, rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where() + "/" + key + ": " + e.what());
    }
  }

  void get_vec3(const char* key, Vec3& out) {
    std::vector<double> v{out.x(), out.y(), out.z()};
    get(key, v);
    if (v.size() != 3) throw ConfigError(where() + "/" + key + " must have 3 entries");
    out = Vec3(v[0], v[1], v[2]);
  }

  ObjectReader child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return ObjectReader(j_.contains(key) ? j_.at(key) : empty, path_ + "/" + key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key " + path_ + "/" + key);
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

EnvConfig RunConfig::effective_env() const {
  EnvConfig e = env;
  e.align = toggles.align;
  e.aux = toggles.aux;
  return e;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid config: ") + what);
  };
  require(env.scene_grid.dims > 0 && env.scene_grid.dims % kCoarseDims == 0,
          "env.scene_grid.dims must be a positive multiple of 8");
  require(env.roi_dims > 0 && env.roi_dims % kCoarseDims == 0,
          "env.roi_dims must be a positive multiple of 8");
  require(env.scene_grid.resolution > 0.0, "env.scene_grid.resolution must be positive");
  require(env.roi_side > 0.0, "env.roi_side must be positive");
  require(env.image.width > 0 && env.image.height > 0, "env.image size must be positive");
  require(env.image.vertical_fov > 0.0 && env.image.vertical_fov < kPi,
          "env.image.vertical_fov must lie in (0, pi)");
  require(!env.theta_bins_deg.empty(), "env.theta_bins_deg must not be empty");
  for (double t : env.theta_bins_deg) {
    require(t > 0.0 && t <= 90.0, "env.theta_bins_deg entries must lie in (0, 90]");
  }
  require(env.phi_bins > 0, "env.phi_bins must be positive");
  require(env.view_radius > 0.0, "env.view_radius must be positive");
  require(env.roi_lattice > 0 && env.translation_lattice > 0 && env.yaw_bins > 0,
          "env lattices must be positive");
  require(env.max_steps > 0, "env.max_steps must be positive");
  require(env.goal_tolerance > 0.0, "env.goal_tolerance must be positive");
  require(env.gripper_open > 0.0, "env.gripper_open must be positive");
  require(demo.count >= 0, "demo.count must be non-negative");
  require(demo.augment_per_segment >= 0, "demo.augment_per_segment must be non-negative");
  require(demo.thresholds.eps_g > 0.0 && demo.thresholds.eps_v > 0.0,
          "demo thresholds must be positive");
  require(demo.thresholds.stable_frames >= 1, "demo.stable_frames must be at least 1");
  require(eval.episodes >= 1, "eval.episodes must be at least 1");
  try {
    trainer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

json to_json(const RunConfig& c) {
  const EnvConfig& e = c.env;
  const TrainerConfig& t = c.trainer;
  json j;
  j["task"] = to_string(c.task);
  j["seed"] = c.seed;
  j["env"] = {
      {"workspace_min", vec3(e.workspace.lo)},
      {"workspace_max", vec3(e.workspace.hi)},
      {"hemisphere_center", vec3(e.hemisphere_center)},
      {"scene_grid",
       {{"center", vec3(e.scene_grid.center)},
        {"resolution", e.scene_grid.resolution},
        {"dims", e.scene_grid.dims}}},
      {"roi_side", e.roi_side},
      {"roi_dims", e.roi_dims},
      {"image",
       {{"width", e.image.width},
        {"height", e.image.height},
        {"vertical_fov", e.image.vertical_fov}}},
      {"theta_bins_deg", e.theta_bins_deg},
      {"phi_bins", e.phi_bins},
      {"view_radius", e.view_radius},
      {"initial_theta_deg", e.initial_theta_deg},
      {"initial_phi_deg", e.initial_phi_deg},
      {"roi_lattice", e.roi_lattice},
      {"translation_lattice", e.translation_lattice},
      {"yaw_bins", e.yaw_bins},
      {"max_steps", e.max_steps},
      {"goal_tolerance", e.goal_tolerance},
      {"gripper_home", vec3(e.gripper_home)},
      {"gripper_open", e.gripper_open},
      {"entropy_gain", e.entropy_gain},
      {"record_initial_view_entropy", e.record_initial_view_entropy},
  };
  j["trainer"] = {
      {"gamma", t.gamma},
      {"learning_rate", t.learning_rate},
      {"batch_size", t.batch_size},
      {"updates", t.updates},
      {"target_sync", t.target_sync},
      {"epsilon_start", t.epsilon_start},
      {"epsilon_end", t.epsilon_end},
      {"epsilon_decay_fraction", t.epsilon_decay_fraction},
      {"online_capacity", t.online_capacity},
      {"env_steps_per_update", t.env_steps_per_update},
      {"pretrain_updates", t.pretrain_updates},
      {"hidden", t.hidden},
      {"chunk", t.chunk},
  };
  j["demo"] = {
      {"count", c.demo.count},
      {"augment_per_segment", c.demo.augment_per_segment},
      {"eps_g", c.demo.thresholds.eps_g},
      {"eps_v", c.demo.thresholds.eps_v},
      {"stable_frames", c.demo.thresholds.stable_frames},
  };
  j["eval"] = {{"episodes", c.eval.episodes}};
  j["toggles"] = {
      {"align", c.toggles.align}, {"aug", c.toggles.aug}, {"aux", c.toggles.aux}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  ObjectReader root(j, "");
  std::string task = to_string(c.task);
  root.get("task", task);
  try {
    c.task = task_from_string(task);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  root.get("seed", c.seed);

  EnvConfig& e = c.env;
  ObjectReader env = root.child("env");
  env.get_vec3("workspace_min", e.workspace.lo);
  env.get_vec3("workspace_max", e.workspace.hi);
  env.get_vec3("hemisphere_center", e.hemisphere_center);
  ObjectReader grid = env.child("scene_grid");
  grid.get_vec3("center", e.scene_grid.center);
  grid.get("resolution", e.scene_grid.resolution);
  grid.get("dims", e.scene_grid.dims);
  grid.finish();
  env.get("roi_side", e.roi_side);
  env.get("roi_dims", e.roi_dims);
  ObjectReader image = env.child("image");
  image.get("width", e.image.width);
  image.get("height", e.image.height);
  image.get("vertical_fov", e.image.vertical_fov);
  image.finish();
  env.get("theta_bins_deg", e.theta_bins_deg);
  env.get("phi_bins", e.phi_bins);
  env.get("view_radius", e.view_radius);
  env.get("initial_theta_deg", e.initial_theta_deg);
  env.get("initial_phi_deg", e.initial_phi_deg);
  env.get("roi_lattice", e.roi_lattice);
  env.get("translation_lattice", e.translation_lattice);
  env.get("yaw_bins", e.yaw_bins);
  env.get("max_steps", e.max_steps);
  env.get("goal_tolerance", e.goal_tolerance);
  env.get_vec3("gripper_home", e.gripper_home);
  env.get("gripper_open", e.gripper_open);
  env.get("entropy_gain", e.entropy_gain);
  env.get("record_initial_view_entropy", e.record_initial_view_entropy);
  env.finish();

  TrainerConfig& t = c.trainer;
  ObjectReader tr = root.child("trainer");
  tr.get("gamma", t.gamma);
  tr.get("learning_rate", t.learning_rate);
  tr.get("batch_size", t.batch_size);
  tr.get("updates", t.updates);
  tr.get("target_sync", t.target_sync);
  tr.get("epsilon_start", t.epsilon_start);
  tr.get("epsilon_end", t.epsilon_end);
  tr.get("epsilon_decay_fraction", t.epsilon_decay_fraction);
  tr.get("online_capacity", t.online_capacity);
  tr.get("env_steps_per_update", t.env_steps_per_update);
  tr.get("pretrain_updates", t.pretrain_updates);
  tr.get("hidden", t.hidden);
  tr.get("chunk", t.chunk);
  tr.finish();

  ObjectReader demo = root.child("demo");
  demo.get("count", c.demo.count);
  demo.get("augment_per_segment", c.demo.augment_per_segment);
  demo.get("eps_g", c.demo.thresholds.eps_g);
  demo.get("eps_v", c.demo.thresholds.eps_v);
  demo.get("stable_frames", c.demo.thresholds.stable_frames);
  demo.finish();

  ObjectReader ev = root.child("eval");
  ev.get("episodes", c.eval.episodes);
  ev.finish();

  ObjectReader tg = root.child("toggles");
  tg.get("align", c.toggles.align);
  tg.get("aug", c.toggles.aug);
  tg.get("aux", c.toggles.aux);
  tg.finish();
  root.finish();

  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return run_config_from_json(j);
}

RunConfig apply_env_overrides(const RunConfig& cfg, char** envp) {
  std::vector<std::pair<std::string, std::string>> vars;
  for (char** p = envp; p && *p; ++p) {
    const std::string entry(*p);
    if (entry.rfind("AVAM_", 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    vars.emplace_back(entry.substr(5, eq - 5), entry.substr(eq + 1));
  }
  if (vars.empty()) return cfg;
  std::sort(vars.begin(), vars.end());

  json j = to_json(cfg);
  for (const auto& [name, raw] : vars) {
    std::string path = name;
    std::transform(path.begin(), path.end(), path.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    for (std::size_t pos; (pos = path.find("__")) != std::string::npos;) path.replace(pos, 2, "/");
    const json::json_pointer ptr("/" + path);
    if (!j.contains(ptr)) throw ConfigError("AVAM_" + name + " names no config key");
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    j[ptr] = value;
  }
  return run_config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("seed");
  j.erase("eval");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

}  // namespace avam
