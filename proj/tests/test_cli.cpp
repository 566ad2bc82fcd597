#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qswitch/cli.hpp"
#include "qswitch/config.hpp"

using namespace qswitch;
namespace fs = std::filesystem;

namespace {

const std::string kFig2 = std::string(QSWITCH_CONFIG_DIR) + "/fig2_memory.json";
const std::string kFig3 = std::string(QSWITCH_CONFIG_DIR) + "/fig3_requests.json";

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qswitch_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({"frobnicate"}).code == kExitValidation);
  CHECK(cli({"analyze"}).code == kExitValidation);
  CHECK(cli({"analyze", "--config", "/nonexistent.json"}).code == kExitValidation);
  CHECK(cli({"analyze", "--config", kFig2, "--slots", "many"}).code == kExitValidation);
}

TEST_CASE("analyze") {
  const Run ok = cli({"analyze", "--config", kFig2, "--memory", "14", "--policy", "ssr,mma"});
  REQUIRE(ok.code == kExitOk);
  const json doc = json::parse(ok.out);
  REQUIRE(doc["reports"].size() == 2);
  CHECK(doc["reports"][1]["policy"] == "mma");
  CHECK(doc["reports"][1]["source"] == "mma-closed-form");
  CHECK(doc["reports"][1]["params"]["subsets"] == json::parse("[[2, 3, 4, 5]]"));
  CHECK(doc["config"]["memory"] == 14);

  const Run bad = cli({"analyze", "--config", kFig2, "--memory", "2"});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("memory below largest request") != std::string::npos);

  const Run smw = cli({"analyze", "--config", kFig2, "--policy", "smw"});
  CHECK(smw.code == kExitOk);
  CHECK(smw.err.find("no closed-form") != std::string::npos);
}

TEST_CASE("an SSR parameter block with a zero marginal reports an infinite age") {
  const fs::path dir = scratch("zero");
  std::ofstream(dir / "zero.json") << R"({
    "n_users": 3, "p": [1, 1, 1], "q": {"2": 1}, "memory": 2,
    "requests": [[1, 2], [2, 3]],
    "experiment": {"policies": ["ssr"],
                   "policy_params": {"ssr": {"mu0": {"2": 1}, "marginals": {"2": [1.0, 0.0]}}}}
  })";
  const Run r = cli({"analyze", "--config", (dir / "zero.json").string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.out.find("infinite") != std::string::npos);

  std::ofstream(dir / "typo.json") << R"({
    "n_users": 3, "p": [1, 1, 1], "q": {"2": 1}, "memory": 2,
    "experiment": {"policies": ["ssr"],
                   "policy_params": {"ssr": {"mu0": {"x": 1}, "marginals": {}}}}
  })";
  CHECK(cli({"analyze", "--config", (dir / "typo.json").string()}).code == kExitValidation);
}

TEST_CASE("enumerate-subsets and optimize") {
  const Run e = cli({"enumerate-subsets", "--config", kFig2, "--memory", "5"});
  REQUIRE(e.code == kExitOk);
  CHECK(json::parse(e.out)["subsets"] == json::parse("[[2, 3], [4], [5]]"));

  const Run o = cli({"optimize", "--config", kFig3, "--memory", "20"});
  REQUIRE(o.code == kExitOk);
  const json doc = json::parse(o.out);
  CHECK(doc["mma"]["kkt_residual"].get<double>() <= 1e-8);
  CHECK(doc["ssr"]["classes"]["2"]["budget"] == 10);
  CHECK(doc["ssr"]["classes"]["2"]["gamma_residual"].get<double>() <= 1e-10);
}

TEST_CASE("sweep-requests request counts") {
  const Run r = cli({"sweep-requests", "--config", kFig3, "--slots", "0"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.starts_with("# config: "));
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 1 + 6 * 3);
  CHECK(rows[0][0] == "max_cardinality");
  const std::vector<std::string> expected{"21", "56", "91", "112", "119", "120"};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][2] == expected[(i - 1) / 3]);
    CHECK(rows[i][4].empty());  // no simulation requested
  }
}

TEST_CASE("files written with --out replay from their embedded configuration") {
  const fs::path dir = scratch("replay");
  const Run r = cli({"sweep-memory", "--config", kFig2, "--from", "5", "--to", "6", "--slots",
                     "20000", "--burn-in", "1000", "--reps", "2", "--seed", "4", "--out",
                     (dir / "a").string()});
  REQUIRE(r.code == kExitOk);
  const fs::path first = dir / "a" / "sweep_memory.csv";
  REQUIRE(fs::exists(first));
  const auto rows = csv_rows(slurp(first));
  REQUIRE(rows.size() == 1 + 2 * 3);
  CHECK(rows[1][1] == "ssr");
  CHECK(rows[2][1] == "smw");
  CHECK(rows[2][3].empty());
  CHECK(rows[1].back() == "4");

  const Run again = cli({"sweep-memory", "--config", first.string(), "--out", (dir / "b").string()});
  REQUIRE(again.code == kExitOk);
  CHECK(slurp(dir / "b" / "sweep_memory.csv") == slurp(first));
}

TEST_CASE("simulate with a trace") {
  const fs::path dir = scratch("trace");
  CHECK(cli({"simulate", "--config", kFig2, "--slots", "2000", "--burn-in", "10", "--trace"}).code ==
        kExitValidation);
  const Run r = cli({"simulate", "--config", kFig2, "--slots", "2000", "--burn-in", "10", "--reps",
                     "2", "--policy", "mma", "--trace", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(fs::exists(dir / "simulate.json"));
  CHECK(fs::exists(dir / "simulate.csv"));
  const auto trace = csv_rows(slurp(dir / "trace_mma.csv"));
  CHECK(trace.size() == 1 + 2000 * 26);
  CHECK(trace[0] == std::vector<std::string>{"slot", "request_id", "u", "c", "d", "h"});

  const json doc = json::parse(slurp(dir / "simulate.json"));
  CHECK(doc["results"][0]["replications"].size() == 2);
  CHECK(doc["results"][0]["replications"][1]["stream"] == 1);
  CHECK(cli({"simulate", "--config", kFig2, "--slots", "0"}).code == kExitValidation);
}
