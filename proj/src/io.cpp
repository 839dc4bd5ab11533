#include "avam/io.hpp"

#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace avam {

using nlohmann::json;

ParseError::ParseError(const std::string& source, int line, const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                         ": " + what),
      source_(source),
      line_(line) {}

namespace {

json vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 to_vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json viewpoint_json(const Viewpoint& v) {
  return {{"r", v.r}, {"theta", v.theta}, {"phi", v.phi}};
}

Viewpoint viewpoint_from(const json& j) {
  Viewpoint v;
  v.r = j.at("r").get<double>();
  v.theta = j.at("theta").get<double>();
  v.phi = j.at("phi").get<double>();
  return v;
}

json gripper_json(const GripperPose& g) {
  return {{"position", vec3(g.position)},
          {"orientation", vec3(g.orientation)},
          {"closure", g.closure}};
}

GripperPose gripper_from(const json& j) {
  GripperPose g;
  g.position = to_vec3(j.at("position"));
  g.orientation = to_vec3(j.at("orientation"));
  g.closure = j.at("closure").get<double>();
  return g;
}

// Reads non-empty lines, parsing each as a JSON object with a "type" tag.
class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(json& out) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (line.empty()) continue;
      try {
        out = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(std::string("malformed JSON: ") + e.what());
      }
      if (!out.is_object() || !out.contains("type") || !out["type"].is_string()) {
        fail("record without a type tag");
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }
  int line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  int line_ = 0;
};

// Runs `body`, turning JSON access errors into a ParseError at the current line.
template <typename F>
void guarded(const LineReader& r, F&& body) {
  try {
    body();
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    r.fail(e.what());
  }
}

}  // namespace

json scene_to_json(const SceneSpec& scene) {
  json solids = json::array();
  for (const auto& s : scene.solids) {
    solids.push_back({{"lo", vec3(s.box.lo)},
                      {"hi", vec3(s.box.hi)},
                      {"feature", vec3(s.feature)},
                      {"role", to_string(s.role)}});
  }
  return {{"workspace_min", vec3(scene.workspace.lo)},
          {"workspace_max", vec3(scene.workspace.hi)},
          {"hemisphere_center", vec3(scene.hemisphere_center)},
          {"goal", vec3(scene.goal)},
          {"goal_closed", scene.goal_closed},
          {"solids", solids}};
}

SceneSpec scene_from_json(const json& j) {
  SceneSpec s;
  s.workspace = Aabb{to_vec3(j.at("workspace_min")), to_vec3(j.at("workspace_max"))};
  s.hemisphere_center = to_vec3(j.at("hemisphere_center"));
  s.goal = to_vec3(j.at("goal"));
  s.goal_closed = j.at("goal_closed").get<bool>();
  for (const auto& o : j.at("solids")) {
    Solid solid;
    solid.box = Aabb{to_vec3(o.at("lo")), to_vec3(o.at("hi"))};
    solid.feature = to_vec3(o.at("feature"));
    solid.role = solid_role_from_string(o.at("role").get<std::string>());
    s.solids.push_back(solid);
  }
  s.validate();
  return s;
}

void write_demo(std::ostream& out, const DemoFile& demo) {
  const DemoTrajectory& t = demo.traj;
  out << json{{"type", "header"},
              {"format", kLogFormat},
              {"config_hash", demo.config_hash},
              {"index", demo.index},
              {"seed", t.seed},
              {"task", to_string(t.task)},
              {"rate_hz", t.rate_hz},
              {"frames", t.size()}}
             .dump()
      << '\n';
  out << json{{"type", "scene"}, {"scene", scene_to_json(t.scene)}}.dump() << '\n';
  for (const auto& f : t.frames) {
    out << json{{"type", "frame"},
                {"index", f.index},
                {"viewpoint", viewpoint_json(f.viewpoint)},
                {"gripper", gripper_json(f.gripper)}}
               .dump()
        << '\n';
  }
  json pairs = json::array();
  for (const auto& p : demo.keyframes.pairs()) pairs.push_back({p.camera, p.gripper});
  out << json{{"type", "keyframes"}, {"pairs", pairs}}.dump() << '\n';
}

DemoFile read_demo(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  DemoFile demo;
  json rec;
  int expected_frames = -1;
  bool have_scene = false;
  bool have_keyframes = false;
  while (reader.next(rec)) {
    const std::string type = rec["type"];
    guarded(reader, [&] {
      if (expected_frames < 0 && type != "header") reader.fail("demo must start with a header");
      if (type == "header") {
        if (expected_frames >= 0) reader.fail("duplicate header");
        if (rec.at("format").get<int>() != kLogFormat) reader.fail("unsupported format");
        demo.config_hash = rec.at("config_hash").get<std::string>();
        demo.index = rec.at("index").get<int>();
        demo.traj.seed = rec.at("seed").get<std::uint64_t>();
        demo.traj.task = task_from_string(rec.at("task").get<std::string>());
        demo.traj.rate_hz = rec.at("rate_hz").get<double>();
        expected_frames = rec.at("frames").get<int>();
      } else if (type == "scene") {
        demo.traj.scene = scene_from_json(rec.at("scene"));
        have_scene = true;
      } else if (type == "frame") {
        DemoFrame f;
        f.index = rec.at("index").get<int>();
        if (f.index != demo.traj.size()) reader.fail("frame index out of sequence");
        f.viewpoint = viewpoint_from(rec.at("viewpoint"));
        f.gripper = gripper_from(rec.at("gripper"));
        demo.traj.frames.push_back(f);
      } else if (type == "keyframes") {
        std::vector<KeyframePair> pairs;
        for (const auto& p : rec.at("pairs")) pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
        demo.keyframes = KeyframeSet(std::move(pairs), demo.traj.size());
        have_keyframes = true;
      } else {
        reader.fail("unknown record type " + type);
      }
    });
  }
  if (expected_frames < 0) throw ParseError(source, 0, "empty demo file");
  if (!have_scene) throw ParseError(source, 0, "demo has no scene record");
  if (demo.traj.size() != expected_frames) throw ParseError(source, 0, "frame count mismatch");
  if (!have_keyframes) throw ParseError(source, 0, "demo has no keyframes record");
  return demo;
}

void write_episode_log(std::ostream& out, const EpisodeLogHeader& header,
                       const std::vector<LoggedEpisode>& episodes) {
  out << json{{"type", "header"},
              {"format", kLogFormat},
              {"config_hash", header.config_hash},
              {"seed", header.seed},
              {"policy", header.policy},
              {"max_steps", header.max_steps},
              {"movable_camera", header.movable_camera}}
             .dump()
      << '\n';
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const EpisodeOutcome& o = episodes[e].outcome;
    for (std::size_t k = 0; k < o.steps.size(); ++k) {
      const StepRecord& s = o.steps[k];
      out << json{{"type", "step"},
                  {"episode", e},
                  {"step", k},
                  {"entropy_before", s.entropy_before},
                  {"entropy_after", s.entropy_after},
                  {"entropy_initial", s.entropy_initial},
                  {"status", to_string(s.status)},
                  {"interaction", s.interaction},
                  {"camera", {s.camera.view_bin, s.camera.roi_bin}},
                  {"gripper", {s.gripper.translation_bin, s.gripper.yaw_bin, s.gripper.closed}},
                  {"rewards",
                   {{"r_task", s.rewards.r_task},
                    {"r_i", s.rewards.r_i},
                    {"r_e", s.rewards.r_e},
                    {"r_nbv", s.rewards.r_nbv},
                    {"r_nbp", s.rewards.r_nbp}}}}
                 .dump()
          << '\n';
    }
    out << json{{"type", "episode"},
                {"episode", e},
                {"episode_seed", episodes[e].episode_seed},
                {"outcome", to_string(o.kind)},
                {"length", o.length}}
               .dump()
        << '\n';
  }
}

std::vector<ParsedLog> read_episode_logs(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::vector<ParsedLog> logs;
  EpisodeRecord pending;
  std::size_t pending_index = 0;
  json rec;
  while (reader.next(rec)) {
    const std::string type = rec["type"];
    guarded(reader, [&] {
      if (type == "header") {
        if (!pending.steps.empty()) reader.fail("step records without an episode record");
        if (rec.at("format").get<int>() != kLogFormat) reader.fail("unsupported format");
        ParsedLog log;
        log.header.config_hash = rec.at("config_hash").get<std::string>();
        log.header.seed = rec.at("seed").get<std::uint64_t>();
        log.header.policy = rec.at("policy").get<std::string>();
        log.header.max_steps = rec.at("max_steps").get<int>();
        log.header.movable_camera = rec.at("movable_camera").get<bool>();
        logs.push_back(std::move(log));
        pending_index = 0;
        return;
      }
      if (logs.empty()) reader.fail("log must start with a header");
      ParsedLog& log = logs.back();
      const auto episode = rec.at("episode").get<std::size_t>();
      if (episode != log.episodes.size()) reader.fail("episode index out of sequence");
      if (type == "step") {
        if (rec.at("step").get<std::size_t>() != pending.steps.size() ||
            (!pending.steps.empty() && pending_index != episode)) {
          reader.fail("step index out of sequence");
        }
        pending_index = episode;
        pending.steps.push_back({rec.at("entropy_before").get<double>(),
                                 rec.at("entropy_after").get<double>(),
                                 rec.at("entropy_initial").get<double>(),
                                 rec.at("interaction").get<bool>()});
      } else if (type == "episode") {
        pending.outcome = outcome_from_string(rec.at("outcome").get<std::string>());
        pending.length = rec.at("length").get<int>();
        pending.max_steps = log.header.max_steps;
        pending.validate();
        log.episodes.push_back(std::move(pending));
        pending = EpisodeRecord{};
      } else {
        reader.fail("unknown record type " + type);
      }
    });
  }
  if (!pending.steps.empty()) throw ParseError(source, reader.line(), "truncated episode");
  return logs;
}

const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols{
      "policy",  "episodes", "SR",      "EL_mean",   "EL_std",    "TO",       "EF",      "FI_mean",
      "FI_std",  "NI_mean",  "NI_std",  "ASSIG_avg", "ASSIG_max", "AIIG_avg", "AIIG_max"};
  return cols;
}

void write_report_header(std::ostream& out) {
  const auto& cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

namespace {

std::string exact(double x) { return json(x).dump(); }

}  // namespace

void write_report_row(std::ostream& out, const std::string& policy, const MetricsReport& r) {
  out << policy << ',' << r.episodes << ',' << exact(r.sr) << ',' << exact(r.el.mean) << ','
      << exact(r.el.std) << ',' << exact(r.to) << ',' << exact(r.ef) << ',' << exact(r.fi.mean)
      << ',' << exact(r.fi.std) << ',' << exact(r.ni.mean) << ',' << exact(r.ni.std) << ','
      << exact(r.assig.avg) << ',' << exact(r.assig.max) << ','
      << (r.aiig ? exact(r.aiig->avg) : "NA") << ',' << (r.aiig ? exact(r.aiig->max) : "NA")
      << '\n';
}

void write_training_header(std::ostream& out) {
  out << "update,loss,epsilon,episodes,successes,timeouts,failures\n";
}

void write_training_row(std::ostream& out, const TrainingRow& row) {
  out << row.update << ',' << exact(row.loss) << ',' << exact(row.epsilon) << ','
      << row.episodes << ',' << row.successes << ',' << row.timeouts << ',' << row.failures
      << '\n';
}

namespace {

constexpr char kMagic[8] = {'A', 'V', 'A', 'M', 'C', 'K', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::string& path) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(path, 0, "truncated checkpoint");
  }
  return value;
}

void put_net(std::ostream& out, const QNetwork& net) {
  put<std::uint32_t>(out, net.input_size());
  put<std::uint32_t>(out, net.hidden().size());
  for (int h : net.hidden()) put<std::uint32_t>(out, h);
  put<std::uint32_t>(out, net.heads().size());
  for (int h : net.heads()) put<std::uint32_t>(out, h);
  const std::vector<double> params = net.flat();
  put<std::uint64_t>(out, params.size());
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
}

QNetwork take_net(std::istream& in, const std::string& path) {
  const int input = take<std::uint32_t>(in, path);
  std::vector<int> hidden(take<std::uint32_t>(in, path));
  if (hidden.size() > 64) throw ParseError(path, 0, "implausible layer count");
  for (int& h : hidden) h = take<std::uint32_t>(in, path);
  std::vector<int> heads(take<std::uint32_t>(in, path));
  if (heads.size() > 64) throw ParseError(path, 0, "implausible head count");
  for (int& h : heads) h = take<std::uint32_t>(in, path);
  QNetwork net(input, hidden, heads);
  const auto count = take<std::uint64_t>(in, path);
  if (count != net.parameter_count()) throw ParseError(path, 0, "parameter count mismatch");
  std::vector<double> params(count);
  if (!in.read(reinterpret_cast<char*>(params.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw ParseError(path, 0, "truncated checkpoint");
  }
  net.set_flat(params);
  return net;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, ckpt.config_hash);
  put_net(out, ckpt.agent.nbv);
  put_net(out, ckpt.agent.nbp);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open checkpoint");
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError(path, 0, "not a checkpoint file");
  }
  if (take<std::uint32_t>(in, path) != kCheckpointVersion) {
    throw ParseError(path, 0, "unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.config_hash = take<std::uint64_t>(in, path);
  ckpt.agent.nbv = take_net(in, path);
  ckpt.agent.nbp = take_net(in, path);
  return ckpt;
}

}  // namespace avam
