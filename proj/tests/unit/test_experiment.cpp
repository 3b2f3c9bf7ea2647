#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rwrange/experiment.hpp"

using namespace rwrange;
using namespace rwrange::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rwrange_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_tails(const fs::path& dir, unsigned threads) {
  ExperimentConfig c;
  c.command = Command::Tails;
  c.d = 6;
  c.kind = ObservableKind::CutPoints;
  c.n = 128;
  c.samples = 1200;
  c.seed = 99;
  c.threads = threads;
  c.output_dir = dir.string();
  c.checkpoint_every = 250;
  return c;
}

}  // namespace

TEST_CASE("config json round trip is idempotent") {
  ExperimentConfig c;
  c.command = Command::Capacity;
  c.radius_factors = {4, 16};
  c.seed = 0xffffffffffffffffULL;
  c.solver.preconditioner = Preconditioner::None;
  const json once = to_json(config_from_json(to_json(c)));
  CHECK(once == to_json(c));
  CHECK(to_json(config_from_json(once)) == once);
  const std::string text = once.dump();
  CHECK(to_json(config_from_json(json::parse(text))).dump() == text);
}

TEST_CASE("config parsing rejects unknown keys and bad types") {
  CHECK_THROWS_WITH_AS(config_from_json(json{{"sample", 10}}), "config: unknown key 'sample'",
                       ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"solver", {{"tol", 1}}}}),
                       "config.solver: unknown key 'tol'", ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"d", "seven"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"samples", -1}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"kind", "volume"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"command", "plot"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
  const auto c = config_from_json(json{{"kind", "effective-resistance"}, {"d", 5}});
  CHECK(c.kind == ObservableKind::EffectiveResistance);
  CHECK(c.d == 5);
}

TEST_CASE("validation names the offending field") {
  ExperimentConfig c;
  c.d = 3;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("config.d"), ConfigError);
  c = ExperimentConfig{};
  c.command = Command::Variance;
  c.n_grid = {256, 300};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("config.n_grid"), ConfigError);
  c = ExperimentConfig{};
  c.command = Command::Decompose;
  c.n = 100;
  c.levels = 3;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("config.n"), ConfigError);
  c = ExperimentConfig{};
  c.command = Command::Capacity;
  c.radius_factors = {2};
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("config.radius_factors"), ConfigError);
  c = ExperimentConfig{};
  c.solver.rel_tolerance = 0.1;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("config.solver"), ConfigError);

  std::ostringstream log;
  c.output_dir = scratch("invalid").string();
  CHECK(run(c, log).status == RunStatus::InvalidConfig);
  CHECK_FALSE(fs::exists(c.output_dir));
}

TEST_CASE("n grid parsing") {
  CHECK(parse_n_grid("256..2048") == std::vector<std::size_t>{256, 512, 1024, 2048});
  CHECK(parse_n_grid("8,16,64") == std::vector<std::size_t>{8, 16, 64});
  CHECK_THROWS_AS(parse_n_grid("100..400"), ConfigError);
  CHECK_THROWS_AS(parse_n_grid("8,x"), ConfigError);
}

TEST_CASE("outputs are byte identical for any thread count") {
  const auto a = scratch("det1"), b = scratch("det4");
  std::ostringstream log;
  REQUIRE(run(small_tails(a, 1), log).status == RunStatus::Complete);
  const auto r = run(small_tails(b, 4), log);
  REQUIRE(r.status == RunStatus::Complete);
  CHECK(r.files.size() == 4);
  for (const auto& f : r.files) CHECK(slurp(a / f) == slurp(b / f));
  CHECK(slurp(a / "samples_n128.csv").rfind("# rwrange-lab v0.1.0 schema=sample-rows\n", 0) == 0);
}

TEST_CASE("interrupted runs resume to identical bytes") {
  const auto ref = scratch("ref"), part = scratch("part");
  std::ostringstream log;
  REQUIRE(run(small_tails(ref, 2), log).status == RunStatus::Complete);

  auto cfg = small_tails(part, 1);
  CHECK(run(cfg, log, RunControl{500}).status == RunStatus::Interrupted);
  const json m = json::parse(slurp(part / "manifest.json"));
  CHECK_FALSE(m["complete"].get<bool>());
  CHECK(m["completed_streams"]["tails:n=128"] == json::array({json::array({0, 500})}));
  CHECK_FALSE(verify_manifest(part).empty());

  cfg.threads = 3;
  const auto r = run(cfg, log);
  REQUIRE(r.status == RunStatus::Complete);
  CHECK(log.str().find("resuming at stream 500") != std::string::npos);
  for (const auto& f : r.files) CHECK(slurp(ref / f) == slurp(part / f));
  CHECK(verify_manifest(part).empty());
}

TEST_CASE("a changed config starts afresh") {
  const auto dir = scratch("fresh");
  std::ostringstream log;
  auto cfg = small_tails(dir, 1);
  CHECK(run(cfg, log, RunControl{250}).status == RunStatus::Interrupted);
  cfg.seed = 100;
  std::ostringstream log2;
  CHECK(run(cfg, log2).status == RunStatus::Complete);
  CHECK(log2.str().find("resuming") == std::string::npos);
}

TEST_CASE("manifest verification detects edits") {
  const auto dir = scratch("tamper");
  std::ostringstream log;
  ExperimentConfig c;
  c.command = Command::Clt;
  c.d = 7;
  c.n = 64;
  c.samples = 1000;
  c.output_dir = dir.string();
  REQUIRE(run(c, log).status == RunStatus::Complete);
  CHECK(verify_manifest(dir).empty());
  {
    std::fstream f(dir / "samples_n64.csv", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-3, std::ios::end);
    f.put('7');
  }
  const auto problems = verify_manifest(dir);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0] == "samples_n64.csv: checksum mismatch");
  fs::remove(dir / "clt.json");
  CHECK(verify_manifest(dir).size() == 2);
}

TEST_CASE("oracle check and the smaller commands") {
  std::ostringstream log;
  ExperimentConfig c;
  c.command = Command::OracleCheck;
  c.max_n = 64;
  c.instances = 50;
  c.output_dir = scratch("oracle").string();
  CHECK(run(c, log).status == RunStatus::Complete);
  const json report = json::parse(slurp(fs::path(c.output_dir) / "oracle_report.json"));
  CHECK(report["total_mismatches"] == 0);
  CHECK(report["pairs"].size() == 12);

  c = ExperimentConfig{};
  c.command = Command::Simulate;
  c.d = 5;
  c.n = 50;
  c.samples = 3;
  c.dump_paths = true;
  c.output_dir = scratch("simulate").string();
  REQUIRE(run(c, log).status == RunStatus::Complete);
  std::ifstream dump(fs::path(c.output_dir) / "paths" / "path_2.bin", std::ios::binary);
  const WalkPath back = read_path_dump(dump);
  const WalkPath expected = simulate_walk(5, 50, c.seed, 2);
  CHECK(std::ranges::equal(back.raw(), expected.raw()));
  CHECK(verify_manifest(c.output_dir).empty());

  c = ExperimentConfig{};
  c.command = Command::Decompose;
  c.d = 6;
  c.n = 64;
  c.levels = 3;
  c.samples = 20;
  c.output_dir = scratch("decompose").string();
  REQUIRE(run(c, log).status == RunStatus::Complete);
  const std::string rows = slurp(fs::path(c.output_dir) / "samples_n64.csv");
  // 7 error rows and 8 leaf rows per stream, plus schema and header lines.
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 20 * 15 + 2);

  c = ExperimentConfig{};
  c.command = Command::Capacity;
  c.d = 4;
  c.n = 200;
  c.walks = 2;
  c.radius_factors = {4, 8};
  c.output_dir = scratch("capacity").string();
  REQUIRE(run(c, log).status == RunStatus::Complete);
  const json cap = json::parse(slurp(fs::path(c.output_dir) / "capacity_summary.json"));
  CHECK(cap["per_factor"].size() == 2);
}

TEST_CASE("io failure leaves an incomplete manifest") {
  const auto dir = scratch("iofail");
  std::ostringstream log;
  auto cfg = small_tails(dir, 1);
  fs::create_directories(dir / "survival.csv");  // a directory where a file must go
  const auto r = run(cfg, log);
  CHECK(r.status == RunStatus::Failed);
  CHECK_FALSE(r.message.empty());
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK_FALSE(m["complete"].get<bool>());
  CHECK(fs::exists(dir / "samples_n128.csv"));
}
