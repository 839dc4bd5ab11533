#include <fstream>
#include <sstream>

#include <doctest.h>

#include "avam/commands.hpp"

namespace avam {
namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "avam_test_commands" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_config() {
  RunConfig c;
  c.seed = 3;
  c.demo.count = 2;
  c.demo.augment_per_segment = 3;
  c.trainer.updates = 200;
  c.trainer.hidden = {16};
  c.trainer.batch_size = 8;
  c.eval.episodes = 2;
  return c;
}

TEST_CASE("gen-demos with count zero writes only the manifest") {
  RunConfig c = small_config();
  c.demo.count = 0;
  const fs::path dir = fresh_dir("zero");
  const GenDemosResult r = cmd_gen_demos(c, dir);
  CHECK(r.written == 0);
  CHECK(r.failures.empty());
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    ++files;
    CHECK(e.path().filename() == "manifest.json");
  }
  CHECK(files == 1);
}

TEST_CASE("gen-demos is byte-identical across reruns") {
  const RunConfig c = small_config();
  const fs::path a = fresh_dir("gen_a");
  const fs::path b = fresh_dir("gen_b");
  CHECK(cmd_gen_demos(c, a).written == 2);
  CHECK(cmd_gen_demos(c, b).written == 2);
  for (const auto& e : fs::directory_iterator(a)) {
    CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
  }
  RunConfig other = c;
  other.seed = 4;
  const fs::path d = fresh_dir("gen_c");
  cmd_gen_demos(other, d);
  CHECK(slurp(a / "demo_000.jsonl") != slurp(d / "demo_000.jsonl"));
}

TEST_CASE("train, eval and metrics end to end") {
  const RunConfig c = small_config();
  const fs::path demos = fresh_dir("e2e_demos");
  const fs::path out = fresh_dir("e2e_train");
  cmd_gen_demos(c, demos);

  int rows = 0;
  const TrainResult tr = cmd_train(c, demos, out, [&](const TrainingRow&) { ++rows; });
  CHECK(rows == 200);
  CHECK(tr.ingest.raw == 2u);
  CHECK(tr.ingest.augmented == 2u * 3u);
  CHECK(fs::exists(tr.checkpoint));
  {
    std::ifstream log(tr.log);
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) ++lines;
    CHECK(lines == 201);  // header plus one row per update
  }

  SUBCASE("aug off ingests only raw transitions") {
    RunConfig raw = c;
    raw.toggles.aug = false;
    raw.trainer.updates = 1;
    const TrainResult r = cmd_train(raw, demos, fresh_dir("e2e_raw"));
    CHECK(r.ingest.raw == 2u);
    CHECK(r.ingest.augmented == 0u);
  }

  SUBCASE("single-episode eval has zero spread; metrics recompute the report") {
    const fs::path eval_dir = fresh_dir("e2e_eval1");
    const EvalResult one = cmd_eval(tr.checkpoint, c, 1, PolicyKind::kGreedy, eval_dir);
    CHECK(one.report.episodes == 1);
    CHECK(one.report.el.std == 0.0);

    const EvalResult greedy = cmd_eval(tr.checkpoint, c, 3, PolicyKind::kGreedy, fresh_dir("e2e_g"));
    const EvalResult random =
        cmd_eval(tr.checkpoint, c, 3, PolicyKind::kRandomView, fresh_dir("e2e_r"));
    const auto rows = cmd_metrics({greedy.log, random.log});
    REQUIRE(rows.size() == 2u);
    CHECK(rows[0].first == policy_name(PolicyKind::kGreedy));
    const MetricsReport& a = rows[0].second;
    const MetricsReport& b = greedy.report;
    CHECK(std::abs(a.sr - b.sr) <= 1e-12);
    CHECK(std::abs(a.el.mean - b.el.mean) <= 1e-12);
    CHECK(std::abs(a.el.std - b.el.std) <= 1e-12);
    CHECK(std::abs(a.fi.mean - b.fi.mean) <= 1e-12);
    CHECK(std::abs(a.ni.mean - b.ni.mean) <= 1e-12);
    CHECK(std::abs(a.assig.avg - b.assig.avg) <= 1e-12);
    CHECK(std::abs(a.assig.max - b.assig.max) <= 1e-12);
    CHECK(std::abs(a.aiig->avg - b.aiig->avg) <= 1e-12);

    // The same log twice pools into one row with the same rates.
    const auto twice = cmd_metrics({greedy.log, greedy.log});
    REQUIRE(twice.size() == 1u);
    CHECK(twice[0].second.episodes == 6);
    CHECK(std::abs(twice[0].second.sr - b.sr) <= 1e-12);
  }

  SUBCASE("eval refuses a checkpoint from another config") {
    RunConfig other = c;
    other.trainer.gamma = 0.25;
    CHECK_THROWS_AS(cmd_eval(tr.checkpoint, other, 1, PolicyKind::kGreedy, fresh_dir("e2e_x")),
                    ConfigError);
  }
}

TEST_CASE("metrics rejects an empty log set") {
  CHECK_THROWS_AS(cmd_metrics({}), std::invalid_argument);
}

TEST_CASE("train without a manifest fails") {
  CHECK_THROWS(cmd_train(small_config(), fresh_dir("no_manifest"), fresh_dir("no_manifest_out")));
}

TEST_CASE("inspect summarizes artifacts") {
  const RunConfig c = small_config();
  const fs::path demos = fresh_dir("inspect");
  cmd_gen_demos(c, demos);
  std::ostringstream s;
  cmd_inspect(demos / "manifest.json", s);
  CHECK_FALSE(s.str().empty());
  std::ostringstream d;
  cmd_inspect(demos / "demo_000.jsonl", d);
  CHECK_FALSE(d.str().empty());
}

}  // namespace
}  // namespace avam
