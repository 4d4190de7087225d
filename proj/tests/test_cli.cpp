#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qreadout/cli.hpp"

using namespace qreadout;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = QREADOUT_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qreadout-cli-test-" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

struct Result {
  int status;
  std::string out;
};

//! Runs the built executable with `args`, capturing stdout and stderr.
Result invoke(const std::string& args) {
  const fs::path log = scratch("invoke.log");
  const std::string cmd = std::string(QREADOUT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path p = scratch(name);
  std::ofstream(p) << content;
  return p;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path other = b / fs::relative(e.path(), a);
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return false;
  }
  return files > 0;
}

}  // namespace

TEST_CASE("scenario files are parsed strictly with positions") {
  const auto f = cli::parse_scenario_file(R"({"schema_version": 1, "scenario": "probe", "seed": 3})", "x");
  CHECK(f.scenario == "probe");
  CHECK(f.seed == 3u);
  try {
    cli::parse_scenario_file("{\n  \"schema_version\": 1,\n  \"scenario\": \"probe\",,\n}", "f.json");
    FAIL("expected a parse error");
  } catch (const cli::FileError& e) {
    CHECK(e.line() == 3);
  }
  try {
    cli::parse_scenario_file("{\"schema_version\": 1,\n\"scenario\": \"probe\",\n  \"extra\": 1}", "f.json");
    FAIL("expected an unknown key error");
  } catch (const cli::FileError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  CHECK_THROWS_AS(cli::parse_scenario_file(R"({"schema_version": 2, "scenario": "probe"})", "x"), cli::FileError);
  CHECK_THROWS_AS(cli::parse_scenario_file(R"({"scenario": "probe"})", "x"), cli::FileError);
  CHECK_THROWS_AS(cli::parse_scenario_file(R"({"schema_version": 1, "scenario": "probe", "seed": -1})", "x"),
                  cli::FileError);
  CHECK_THROWS_AS(
      cli::parse_scenario_file(R"({"schema_version": 1, "scenario": "probe", "output": {"format": "xml"}})", "x"),
      cli::FileError);
}

TEST_CASE("every sample scenario runs cleanly") {
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    INFO(e.path());
    const auto r = invoke("run " + e.path().string() + " --out " + scratch(e.path().stem().string()).string());
    INFO(r.out);
    CHECK(r.status == 0);
  }
}

TEST_CASE("signalling bundle has the transition row at t = 10") {
  const fs::path out = scratch("sig");
  REQUIRE(invoke("run " + (kScenarios / "signalling.json").string() + " --out " + out.string()).status == 0);
  const std::string csv = slurp(out / "timeline.csv");
  CHECK(csv.find("\n10,") != std::string::npos);
  CHECK(csv.rfind("t,rho00_re,rho00_im,", 0) == 0);
  CHECK(fs::exists(out / "records.jsonl"));
  CHECK(slurp(out / "summary.txt").find("status: ok") != std::string::npos);
}

TEST_CASE("format flag selects the optional files") {
  const fs::path csv = scratch("fmt-csv"), jsonl = scratch("fmt-jsonl");
  const std::string file = (kScenarios / "signalling.json").string();
  REQUIRE(invoke("run " + file + " --format csv --out " + csv.string()).status == 0);
  REQUIRE(invoke("run " + file + " --format jsonl --out " + jsonl.string()).status == 0);
  CHECK(fs::exists(csv / "timeline.csv"));
  CHECK_FALSE(fs::exists(csv / "records.jsonl"));
  CHECK(fs::exists(jsonl / "records.jsonl"));
  CHECK_FALSE(fs::exists(jsonl / "timeline.csv"));
}

TEST_CASE("seed override is recorded in the header") {
  const fs::path out = scratch("seed");
  REQUIRE(invoke("run " + (kScenarios / "signalling.json").string() + " --seed 1234 --out " + out.string()).status == 0);
  const std::string first = slurp(out / "records.jsonl").substr(0, slurp(out / "records.jsonl").find('\n'));
  CHECK(Json::parse(first)["seed"] == 1234);
}

TEST_CASE("repeated runs are byte-identical") {
  const fs::path a = scratch("det-a"), b = scratch("det-b");
  const std::string file = (kScenarios / "interferometry.json").string();
  REQUIRE(invoke("run " + file + " --out " + a.string()).status == 0);
  REQUIRE(invoke("run " + file + " --out " + b.string()).status == 0);
  CHECK(same_tree(a, b));
}

TEST_CASE("exit codes") {
  const auto bad = invoke("run " + write_temp("bad.json", "{\n \"schema_version\": 1,\n \"scenario\" \"probe\"\n}").string());
  CHECK(bad.status == 64);
  CHECK(bad.out.find("bad.json:3:") != std::string::npos);
  CHECK(invoke("run " + write_temp("unk.json", R"({"schema_version": 1, "scenario": "nope"})").string()).status == 65);
  CHECK(invoke("run " + write_temp("par.json", R"({"schema_version": 1, "scenario": "probe", "parameters": {"x": 1}})").string())
            .status == 64);
  CHECK(invoke("run " + write_temp("ff.json", R"({"schema_version": 1, "scenario": "gravcat", "parameters": {"d": 5}})").string() +
               " --out " + scratch("ff").string())
            .status == 2);
  CHECK(invoke("run " + (kScenarios / "probe_static.json").string() + " --precision 0.1").status == 64);
  CHECK(invoke("run /nonexistent/file.json").status == 64);
  CHECK(invoke("").status == 64);
  CHECK(invoke("list-scenarios").status == 0);
}

TEST_CASE("verify passes, and catches the injected fault") {
  const auto ok = invoke("verify --family-size 40 --seed 5");
  INFO(ok.out);
  CHECK(ok.status == 0);
  const fs::path cx = scratch("cx.json");
  const auto bad = invoke("verify --family-size 40 --seed 5 --skip-invariants --inject-fault --counterexample " + cx.string());
  CHECK(bad.status == 1);
  CHECK(bad.out.find("counterexample") != std::string::npos);
  CHECK(invoke("verify --replay " + cx.string() + " --inject-fault").status == 1);
  CHECK(invoke("verify --replay " + cx.string()).status == 0);
  const auto empty = invoke("verify --family-size 0 --skip-invariants");
  CHECK(empty.status == 0);
  CHECK(empty.out.find("warning") != std::string::npos);
}

TEST_CASE("sweep grids") {
  const std::string file = (kScenarios / "signalling.json").string();
  const fs::path two = scratch("sweep2");
  REQUIRE(invoke("sweep " + file + " --grid d=1,10,100 --grid basis=z,x --jobs 2 --out " + two.string()).status == 0);
  std::ifstream agg(two / "aggregate.csv");
  std::size_t lines = 0;
  for (std::string l; std::getline(agg, l);) ++lines;
  CHECK(lines == 1 + 6);

  // A one-point sweep reproduces `run` exactly.
  const fs::path one = scratch("sweep1"), single = scratch("single");
  REQUIRE(invoke("sweep " + file + " --grid d=10 --out " + one.string()).status == 0);
  REQUIRE(invoke("run " + file + " --set d=10 --out " + single.string()).status == 0);
  CHECK(same_tree(single, one / "job_0"));

  CHECK(invoke("sweep " + file + " --grid nope=1,2").status == 64);
  CHECK(invoke("sweep " + file + " --grid d=1,-1").status == 64);
}

TEST_CASE("precision sweep tracks the rounding prediction") {
  const fs::path out = scratch("eps");
  REQUIRE(invoke("sweep " + (kScenarios / "abrams_lloyd.json").string() +
                 " --grid precision=0.01,0.0001,1e-8 --set runs=0 --out " + out.string())
              .status == 0);
  std::ifstream agg(out / "aggregate.csv");
  std::string header;
  std::getline(agg, header);
  std::vector<std::string> cols;
  std::stringstream hs(header);
  for (std::string c; std::getline(hs, c, ',');) cols.push_back(c);
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(cols.begin(), cols.end(), name) - cols.begin());
  };
  for (std::string line; std::getline(agg, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    const double actual = std::stod(cells[col("max_distinguishable_n")]);
    const double predicted = std::stod(cells[col("predicted_max_n")]);
    CHECK(std::abs(actual - predicted) <= 1.0);
  }
}
