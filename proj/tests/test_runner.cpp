#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "qrelay/runner.hpp"

using namespace qrelay;
using Catch::Approx;

namespace {

const std::string kFixtures = QRELAY_FIXTURE_DIR;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/qrelay_test_") + name;
}

}  // namespace

TEST_CASE("manifest hash is stable and sensitive") {
  RunManifest a;
  a.command = "eval";
  a.channel_path = "x.json";
  a.seed = 42;
  RunManifest b = a;
  CHECK(a.hash() == b.hash());
  b.seed = 43;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("run_eval reproduces the wired-relay rate through the file interface") {
  RunManifest m;
  m.command = "eval";
  m.channel_path = kFixtures + "/wired_relay.channel.json";
  m.config_path = kFixtures + "/example1_pdf.config.json";
  const RunResult res = run_command(m);
  REQUIRE(res.exit_code == 0);
  CHECK(res.csv.find("pdf,2,") != std::string::npos);
  CHECK(res.csv.find(m.hash()) != std::string::npos);
}

TEST_CASE("run_eval reports validation failures with the completeness residual") {
  // corrupt Kraus set: completeness residual 0.75
  const std::string bad = temp_path("bad_channel.json");
  {
    std::ofstream out(bad);
    out << R"({"inputs":[{"name":"A","dim":2},{"name":"D","dim":1}],
               "outputs":[{"name":"B","dim":2},{"name":"E","dim":1}],
               "kraus":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]],
               "roles":{"A":"sender_in","D":"relay_in","B":"dest_out","E":"relay_out"}})";
  }
  RunManifest m;
  m.command = "eval";
  m.channel_path = bad;
  m.config_path = kFixtures + "/example1_pdf.config.json";
  const RunResult res = run_command(m);
  CHECK(res.exit_code == 2);
  CHECK(res.report.find("residual") != std::string::npos);
}

TEST_CASE("run_sweep emits matching closed-form and measure-forward columns") {
  RunManifest m;
  m.command = "sweep";
  m.config_path = kFixtures + "/sweep_grid.config.json";
  const RunResult res = run_command(m);
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(res.csv);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 9);
    const double closed = std::stod(cells[2]);
    const double mf = std::stod(cells[3]);
    CHECK(std::abs(closed - mf) < 1e-9);
    CHECK(cells[6] == "1");  // feasible
  }
  CHECK(rows == 36);
}

TEST_CASE("run_classify labels the bundled channels") {
  RunManifest m;
  m.command = "classify";
  m.channel_path = kFixtures + "/bitpipe_hadamard.channel.json";
  const RunResult bitpipe = run_command(m);
  REQUIRE(bitpipe.exit_code == 0);
  CHECK(bitpipe.report.find("degraded=yes") != std::string::npos);
  CHECK(bitpipe.report.find("hadamard=yes") != std::string::npos);
  CHECK(bitpipe.report.find("orc=not_testable") != std::string::npos);

  m.channel_path = kFixtures + "/wired_relay.channel.json";
  const RunResult wired = run_command(m);
  CHECK(wired.report.find("degraded=no") != std::string::npos);
  CHECK(wired.report.find("orc=yes") != std::string::npos);

  m.channel_path = kFixtures + "/depolarizing.channel.json";
  const RunResult dep = run_command(m);
  CHECK(dep.report.find("orc=yes") != std::string::npos);
}

TEST_CASE("run_simulate gentle run satisfies the bound on every row") {
  RunManifest m;
  m.command = "simulate";
  m.config_path = kFixtures + "/simulate_gentle.config.json";
  m.seed = 9;
  const RunResult res = run_command(m);
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(res.csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.find(",1,") != std::string::npos);  // holds column
  }
  CHECK(rows == 100);
}

TEST_CASE("run_simulate packing emits one row per trial and respects the bound") {
  RunManifest m;
  m.command = "simulate";
  m.channel_path = kFixtures + "/bsc_cq.channel.json";
  m.config_path = kFixtures + "/simulate_bsc.config.json";
  m.seed = 123;
  const RunResult res = run_command(m);
  REQUIRE(res.exit_code == 0);
  std::istringstream lines(res.csv);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 11);
    const double err = std::stod(cells[5]);
    const double bound = std::stod(cells[9]);
    CHECK(err <= std::min(1.0, bound) + 1e-9);
    ++rows;
  }
  CHECK(rows == 40);  // two points, 20 trials each
}

TEST_CASE("identical manifests produce byte-identical CSV") {
  RunManifest m;
  m.command = "sweep";
  m.config_path = kFixtures + "/sweep_grid.config.json";
  m.seed = 42;
  const RunResult a = run_command(m);
  const RunResult b = run_command(m);
  CHECK(a.csv == b.csv);
}

TEST_CASE("cli end to end: eval exits 0 and is deterministic") {
  const std::string out1 = temp_path("cli_eval_1.csv");
  const std::string out2 = temp_path("cli_eval_2.csv");
  const std::string cmd1 = std::string(QRELAY_CLI_PATH) + " eval --channel " + kFixtures +
                           "/depolarizing.channel.json --config " + kFixtures +
                           "/depolarizing_mf.config.json --seed 42 --out " + out1 +
                           " 2>/dev/null";
  const std::string cmd2 = std::string(QRELAY_CLI_PATH) + " eval --channel " + kFixtures +
                           "/depolarizing.channel.json --config " + kFixtures +
                           "/depolarizing_mf.config.json --seed 42 --out " + out2 +
                           " 2>/dev/null";
  REQUIRE(std::system(cmd1.c_str()) == 0);
  REQUIRE(std::system(cmd2.c_str()) == 0);
  CHECK(read_file(out1) == read_file(out2));
  CHECK(read_file(out1).find("mf,") != std::string::npos);
}

TEST_CASE("cli end to end: malformed channel exits with code 2") {
  const std::string bad = temp_path("bad_channel2.json");
  {
    std::ofstream out(bad);
    out << R"({"inputs":[{"name":"A","dim":2},{"name":"D","dim":1}],
               "outputs":[{"name":"B","dim":2},{"name":"E","dim":1}],
               "kraus":[[[[0.7,0],[0,0]],[[0,0],[0.7,0]]]],
               "roles":{"A":"sender_in","D":"relay_in","B":"dest_out","E":"relay_out"}})";
  }
  const std::string cmd = std::string(QRELAY_CLI_PATH) + " classify --channel " + bad +
                          " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
}
