#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string output;
  std::string dir() const {
    auto end = output.find_last_not_of("\n");
    auto start = output.rfind('\n', end);
    return output.substr(start == std::string::npos ? 0 : start + 1, end - (start == std::string::npos ? 0 : start + 1) + 1);
  }
};

Result run(const std::string& args) {
  Result r;
  const std::string cmd = std::string(MUGEN_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.output += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

struct Workspace {
  fs::path root;
  explicit Workspace(const std::string& name) {
    root = fs::temp_directory_path() / ("mugen_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
  std::string file(const std::string& name, const std::string& text) const {
    std::ofstream(root / name) << text;
    return (root / name).string();
  }
  std::string out() const { return "--out " + (root / "runs").string(); }
};

const char* kTrainBump = R"({
  "env": {"id": "synthetic_bump"},
  "method": "mu",
  "m": 3,
  "iterations": 4,
  "minibatch": 4,
  "hidden": [4],
  "checkpoint_every": 2,
  "seed": 1
})";

}  // namespace

TEST_CASE("missing required key names the key") {
  Workspace ws("missing");
  auto cfg = ws.file("train.json", "{\n  \"env\": {\"id\": \"synthetic_bump\"},\n  \"iterations\": 1\n}\n");
  auto r = run(ws.out() + " train " + cfg);
  CHECK(r.code == 2);
  CHECK(r.output.find("method") != std::string::npos);
  CHECK(r.output.find("missing") != std::string::npos);
}

TEST_CASE("config errors carry the line") {
  Workspace ws("line");
  auto cfg = ws.file("train.json", "{\n  \"env\": {\"id\": \"synthetic_bump\"},\n  \"method\": \"mu\",\n  \"m\": -3\n}\n");
  auto r = run(ws.out() + " train " + cfg);
  CHECK(r.code == 2);
  CHECK(r.output.find(":4:") != std::string::npos);

  auto unknown = ws.file("u.json", "{\"env\": {\"id\": \"synthetic_bump\"}, \"method\": \"mu\", \"colour\": 1}");
  auto u = run(ws.out() + " train " + unknown);
  CHECK(u.code == 2);
  CHECK(u.output.find("colour") != std::string::npos);

  auto broken = ws.file("b.json", "{\"env\": ");
  CHECK(run(ws.out() + " train " + broken).code == 2);
  CHECK(run(ws.out() + " train " + (ws.root / "absent.json").string()).code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("train writes a run directory") {
  Workspace ws("train");
  auto cfg = ws.file("train.json", kTrainBump);
  auto r = run(ws.out() + " train " + cfg);
  REQUIRE(r.code == 0);
  fs::path dir = r.dir();
  CHECK(dir.filename().string().size() > 3);
  CHECK(dir.filename().string().ends_with("-s1"));
  auto manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["command"] == "train");
  CHECK(manifest["seed"] == 1);
  for (const auto& f : manifest["outputs"]) CHECK(fs::exists(dir / f.get<std::string>()));
  CHECK(manifest["outputs"].size() == 4);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    bool listed = name == "manifest.json";
    for (const auto& f : manifest["outputs"]) listed |= f == name;
    CHECK_MESSAGE(listed, name);
  }
  auto metrics = slurp(dir / "metrics.csv");
  CHECK(lines(metrics) == 5);
  CHECK(metrics.rfind("iteration,objective,grad_norm,wall_clock\n", 0) == 0);

  SUBCASE("refuses to overwrite") {
    auto again = run(ws.out() + " train " + cfg);
    CHECK(again.code == 3);
    CHECK(again.output.find("--force") != std::string::npos);
  }
  SUBCASE("force rerun is byte identical") {
    auto again = run(ws.out() + " --force train " + cfg);
    REQUIRE(again.code == 0);
    CHECK(again.dir() == r.dir());
    CHECK(slurp(dir / "metrics.csv") == metrics);
  }
  SUBCASE("seed override changes the directory") {
    auto other = run(ws.out() + " --seed 9 --threads 2 train " + cfg);
    REQUIRE(other.code == 0);
    CHECK(other.dir().ends_with("-s9"));
    CHECK(slurp(fs::path(other.dir()) / "metrics.csv") != metrics);
  }
  SUBCASE("wall clock column") {
    auto timed = run(ws.out() + " --seed 2 train --wall-clock " + cfg);
    REQUIRE(timed.code == 0);
    auto m = slurp(fs::path(timed.dir()) / "metrics.csv");
    CHECK(m.find(",\n") == std::string::npos);
  }
}

TEST_CASE("eval and analyze") {
  Workspace ws("eval");
  auto train_cfg = ws.file("train.json", kTrainBump);
  auto trained = run(ws.out() + " train " + train_cfg);
  REQUIRE(trained.code == 0);
  const std::string ckpt = (fs::path(trained.dir()) / "checkpoint.json").string();
  auto corpus_cfg = ws.file("corpus.json", R"({"env": {"id": "synthetic_bump"}, "count": 12, "seed": 4})");
  auto corpus = run(ws.out() + " corpus " + corpus_cfg);
  REQUIRE(corpus.code == 0);
  const std::string corpus_file = (fs::path(corpus.dir()) / "corpus.json").string();

  auto eval_cfg = ws.file("eval.json", json{{"corpus", corpus_file},
                                            {"generators", {{{"name", "grid"}, {"kind", "uniform_grid"}, {"m", 4}}}},
                                            {"planners", {"ucb", "kr_ucb"}},
                                            {"budgets", {4, 8, 16}},
                                            {"eval_samples", 20},
                                            {"seed", 5}}
                                           .dump(2));
  auto e = run(ws.out() + " eval " + eval_cfg + " --checkpoint " + ckpt);
  REQUIRE(e.code == 0);
  auto report = slurp(fs::path(e.dir()) / "report.csv");
  CHECK(lines(report) == 1 + 2 * 2 * 3);
  CHECK(report.find("checkpoint1,mu,kr_ucb,16,3,") != std::string::npos);
  CHECK(lines(slurp(fs::path(e.dir()) / "per_state.csv")) == 1 + 2 * 2 * 3 * 12);

  auto e2 = run(ws.out() + " --force eval " + eval_cfg + " --checkpoint " + ckpt);
  REQUIRE(e2.code == 0);
  CHECK(slurp(fs::path(e2.dir()) / "report.csv") == report);

  auto analyze_cfg = ws.file("analyze.json", json{{"corpus", corpus_file}, {"seed", 6}}.dump());
  auto a = run(ws.out() + " analyze " + analyze_cfg + " --checkpoint " + ckpt);
  REQUIRE(a.code == 0);
  fs::path adir = a.dir();
  for (int slot = 0; slot < 3; ++slot) {
    auto m = slurp(adir / ("coverage-checkpoint1-slot" + std::to_string(slot) + ".csv"));
    CHECK(lines(m) == 32);
  }
  CHECK_FALSE(fs::exists(adir / "coverage-checkpoint1-slot3.csv"));
  auto diversity = slurp(adir / "diversity.csv");
  auto a2 = run(ws.out() + " --force analyze " + analyze_cfg + " --checkpoint " + ckpt);
  CHECK(slurp(fs::path(a2.dir()) / "diversity.csv") == diversity);

  SUBCASE("checkpoint problems are artifact errors") {
    auto bad = json::parse(slurp(ckpt));
    bad["version"] = 42;
    auto bad_path = ws.file("bad.json", bad.dump());
    CHECK(run(ws.out() + " eval " + eval_cfg + " --checkpoint " + bad_path).code == 3);
    CHECK(run(ws.out() + " eval " + eval_cfg + " --checkpoint " + (ws.root / "nope.json").string()).code == 3);
  }
  SUBCASE("empty corpus is an explicit error") {
    auto c = json::parse(slurp(corpus_file));
    c["states"] = json::array();
    auto empty = ws.file("empty_corpus.json", c.dump());
    auto cfg = ws.file("eval_empty.json", json{{"corpus", empty}, {"generators", {{{"name", "g"}, {"kind", "uniform_grid"}}}}}.dump());
    auto r = run(ws.out() + " eval " + cfg);
    CHECK(r.code == 3);
    CHECK(r.output.find("no states") != std::string::npos);
  }
  SUBCASE("mismatched environment") {
    auto cfg = ws.file("eval_curl.json", json{{"corpus", {{"env", {{"id", "curling"}}}, {"states", 2}}}}.dump());
    CHECK(run(ws.out() + " eval " + cfg + " --checkpoint " + ckpt).code == 3);
  }
}

TEST_CASE("plan exports the sample log") {
  Workspace ws("plan");
  auto cfg = ws.file("plan.json", json{{"corpus", {{"env", {{"id", "synthetic_bump"}}}, {"states", 3}, {"seed", 1}}},
                                       {"state_index", 2},
                                       {"generator", {{"name", "g"}, {"kind", "uniform_grid"}, {"m", 4}}},
                                       {"budget", 40},
                                       {"seed", 2}}
                                      .dump());
  auto r = run(ws.out() + " plan " + cfg);
  REQUIRE(r.code == 0);
  auto log = slurp(fs::path(r.dir()) / "sample_log.csv");
  CHECK(lines(log) == 41);
  CHECK(log.rfind("iteration,candidate,velocity,angle,turn,reward\n", 0) == 0);
  CHECK(fs::exists(fs::path(r.dir()) / "candidates.csv"));
  auto again = run(ws.out() + " --force plan " + cfg);
  CHECK(slurp(fs::path(again.dir()) / "sample_log.csv") == log);
}

TEST_CASE("sweep rows and the single-point case") {
  Workspace ws("sweep");
  json train = json::parse(kTrainBump);
  train.erase("checkpoint_every");
  train.erase("seed");
  auto corpus = json{{"env", {{"id", "synthetic_bump"}}}, {"states", 6}, {"seed", 3}};
  auto cfg = ws.file("sweep.json", json{{"train", train},
                                        {"corpus", corpus},
                                        {"budget", 8},
                                        {"eval_samples", 10},
                                        {"grid", {{"temperature", {0.1, 1.0}}, {"learning_rate", {1e-3, 1e-2, 1e-1}}}},
                                        {"seed", 7}}
                                       .dump());
  auto r = run(ws.out() + " sweep " + cfg);
  REQUIRE(r.code == 0);
  auto summary = slurp(fs::path(r.dir()) / "summary.csv");
  CHECK(lines(summary) == 1 + 2 * 3);

  auto single = ws.file("single.json", json{{"train", train}, {"corpus", corpus}, {"budget", 8}, {"eval_samples", 10}, {"seed", 7}}.dump());
  auto s = run(ws.out() + " sweep " + single);
  REQUIRE(s.code == 0);
  auto row = slurp(fs::path(s.dir()) / "summary.csv");
  REQUIRE(lines(row) == 2);

  train["seed"] = 7;
  auto t = run(ws.out() + " train " + ws.file("t.json", train.dump()));
  REQUIRE(t.code == 0);
  auto e = run(ws.out() + " eval " +
               ws.file("e.json", json{{"corpus", corpus}, {"budgets", {8}}, {"eval_samples", 10}, {"seed", 7}}.dump()) +
               " --checkpoint " + (fs::path(t.dir()) / "checkpoint.json").string());
  REQUIRE(e.code == 0);
  auto report = slurp(fs::path(e.dir()) / "report.csv");
  // same mean, ci and state count in both tables
  auto tail = [](const std::string& csv, int fields) {
    auto line = csv.substr(csv.find('\n') + 1);
    line = line.substr(0, line.find('\n'));
    std::size_t pos = line.size();
    for (int i = 0; i < fields; ++i) pos = line.rfind(',', pos - 1);
    return line.substr(pos + 1);
  };
  CHECK(tail(row, 3) == tail(report, 3));
}
