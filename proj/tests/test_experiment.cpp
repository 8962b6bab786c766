#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "slch/experiment.hpp"

using namespace slch;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const kTiny = R"({
  "mode": "full-suite",
  "lattice": {"N_lat": 4},
  "noise": {"seeds": [1, 2], "dt": 0.01, "t_min": -40, "t_max": 12},
  "scheme": {"name": "imex_split", "dt": 0.01},
  "audit": {"samples": 200, "radius": 5},
  "simulate": {"tau": 0, "T": 2, "record_stride": 20},
  "absorb": {"tau": 0, "pullback_times": [1, 2, 4], "scales": [1, 2], "gaussian_directions": 0},
  "tails": {"tau": 0, "t": 5, "I": [1, 2, 3]},
  "measure": {"tau": 0, "windows": [5, 10], "stride": 1, "t_step": 1},
  "liouville": {"s": 0, "t": 1, "ladder": [{"window": 5, "dt": 0.02}, {"window": 10, "dt": 0.01}],
                "ito_T": 0.5, "ito_dts": [0.02, 0.01]}
})";

struct Tmp {
  fs::path dir;
  explicit Tmp(const std::string& tag) {
    dir = fs::temp_directory_path() / ("slch_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Tmp() { fs::remove_all(dir); }
};

void put(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Outcome {
  int code;
  std::string err;
};

Outcome cli(const std::string& args, const fs::path& scratch, const std::string& env = "") {
  const fs::path err = scratch / "stderr.txt";
  const std::string cmd = env + " \"" SLCH_CLI_PATH "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(err)};
}

std::string with_output(std::string cfg, const fs::path& out) {
  auto j = json::parse(cfg);
  j["output_dir"] = out.string();
  return j.dump();
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_THROWS_AS(ExperimentConfig::parse("{"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("{}"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "dance"})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "audit", "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "audit", "noise": {"dt": "small"}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "audit", "model": {"window_radius": 3}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "audit", "lattice": {"N_lat": 0}})"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse(R"({"mode": "audit", "scheme": {"name": "leapfrog"}})"), ConfigError);

  const auto c = ExperimentConfig::parse(kTiny);
  CHECK(c.mode == Mode::FullSuite);
  CHECK(c.model.window_radius() == 4);
  CHECK(c.liouville.ladder.size() == 2);
  CHECK(c.noise.seeds == std::vector<std::uint64_t>{1, 2});
  c.validate();
  // The canonical echo parses back to the same configuration.
  CHECK(ExperimentConfig::parse(c.canonical).canonical == c.canonical);
}

TEST_CASE("span arithmetic is checked before running") {
  auto j = json::parse(kTiny);
  j["simulate"]["T"] = 30;
  CHECK_THROWS_AS(ExperimentConfig::parse(j.dump()).validate(), SpanError);
  j = json::parse(kTiny);
  j["liouville"]["ladder"][0]["window"] = 100;
  CHECK_THROWS_AS(ExperimentConfig::parse(j.dump()).validate(), SpanError);
  j = json::parse(kTiny);
  j["scheme"]["dt"] = 0.015;
  CHECK_THROWS_AS(ExperimentConfig::parse(j.dump()).validate(), ConfigError);
  j = json::parse(kTiny);
  j["model"] = {{"q", 3}};
  CHECK_THROWS_AS(ExperimentConfig::parse(j.dump()).validate(), ConfigError);
}

TEST_CASE("error mapping") {
  auto check = [](const std::exception& e, int code, const char* name) {
    const auto r = describe_error(e);
    CHECK(r.exit_code == code);
    const auto j = json::parse(r.json);
    CHECK(j["code"] == name);
    CHECK(j.contains("message"));
    CHECK(j["context"].is_object());
    return j;
  };
  check(ConfigError("x"), 2, "invalid_config");
  const auto s = check(SpanError("x", -1.0, 2.0), 4, "span_error");
  CHECK(s["context"]["admissible_hi"] == 2.0);
  const auto m = check(MissingArtifactError("x", "a/b.csv"), 4, "missing_artifact");
  CHECK(m["context"]["path"] == "a/b.csv");
  check(BlowUpError("x", 1.5, {1.0, 2.0}), 3, "blow_up");
  check(std::runtime_error("x"), 1, "internal");
}

TEST_CASE("command line exit codes") {
  Tmp t("cli");
  put(t.dir / "broken.json", "{ not json");
  auto o = cli("run \"" + (t.dir / "broken.json").string() + "\"", t.dir);
  CHECK(o.code == 2);
  CHECK(json::parse(o.err)["code"] == "invalid_config");

  CHECK(cli("validate \"" + (t.dir / "absent.json").string() + "\"", t.dir).code == 2);

  o = cli("run \"" SLCH_SOURCE_DIR "/configs/explosive.json\"", t.dir, "SLCH_OUTPUT_DIR=\"" + (t.dir / "x").string() + "\"");
  CHECK(o.code == 3);
  const auto bj = json::parse(o.err);
  CHECK(bj["code"] == "blow_up");
  CHECK(bj["context"]["norm_history"].is_array());

  auto j = json::parse(kTiny);
  j["mode"] = "simulate";
  j["simulate"]["tau"] = 11;
  put(t.dir / "span.json", j.dump());
  o = cli("run \"" + (t.dir / "span.json").string() + "\"", t.dir);
  CHECK(o.code == 4);
  CHECK(json::parse(o.err)["code"] == "span_error");

  o = cli("emit-plots \"" + (t.dir / "nowhere").string() + "\"", t.dir);
  CHECK(o.code == 4);
  CHECK(json::parse(o.err)["code"] == "missing_artifact");

  CHECK(cli("validate \"" SLCH_SOURCE_DIR "/configs/audit.json\"", t.dir).code == 0);
}

TEST_CASE("runs are byte-reproducible and plot data is well formed") {
  Tmp t("repro");
  const fs::path a = t.dir / "a", b = t.dir / "b";
  put(t.dir / "a.json", with_output(kTiny, a));
  put(t.dir / "b.json", with_output(kTiny, b));
  REQUIRE(cli("run \"" + (t.dir / "a.json").string() + "\"", t.dir).code == 0);
  REQUIRE(cli("run \"" + (t.dir / "b.json").string() + "\"", t.dir).code == 0);

  const auto man = json::parse(slurp(a / "manifest.json"));
  CHECK(man["mode"] == "full-suite");
  CHECK(man["files"].size() >= 10);
  for (const auto& f : man["files"]) {
    const std::string name = f["name"];
    CAPTURE(name);
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));

  REQUIRE(cli("emit-plots \"" + a.string() + "\"", t.dir).code == 0);
  std::map<std::string, std::string> first;
  for (const char* dat : {"absorption.dat", "tails.dat", "invariance.dat", "ito.dat", "liouville.dat"}) {
    CAPTURE(dat);
    REQUIRE(fs::exists(a / dat));
    const std::string s = slurp(a / dat);
    first[dat] = s;
    std::istringstream in(s);
    std::string header, line;
    std::getline(in, header);
    REQUIRE(header.rfind("# ", 0) == 0);
    const auto cols = std::count(header.begin(), header.end(), ' ');
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      CHECK(std::count(line.begin(), line.end(), ' ') + 1 == cols);
      ++rows;
    }
    CHECK(rows > 0);
  }
  CHECK(fs::exists(a / "plots.gp"));
  REQUIRE(cli("emit-plots \"" + a.string() + "\"", t.dir).code == 0);
  for (const auto& [name, s] : first) CHECK(slurp(a / name) == s);

  fs::remove(a / "tails.csv");
  const auto o = cli("emit-plots \"" + a.string() + "\"", t.dir);
  CHECK(o.code == 4);
  CHECK(json::parse(o.err)["code"] == "missing_artifact");
}
