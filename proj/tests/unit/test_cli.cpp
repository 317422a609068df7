// Copyright 2026 The pnpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnpe/cli/commands.hpp"

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PNPE_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

// Data lines of a CSV document, header row first.
std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

}  // namespace

TEST(Exit, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("no-such-command").code, 2);
  EXPECT_EQ(run("optimize --format xml").code, 2);
  EXPECT_EQ(run("optimize --set foo.bar=1").code, 2);
  EXPECT_EQ(run("optimize --set source.g").code, 2);
  EXPECT_EQ(run("optimize --cutoff 20").code, 2);
  EXPECT_EQ(run("optimize --set optimizer.restarts=banana").code, 2);
  EXPECT_EQ(run("table-s1 --eta 0.71").code, 2);
  EXPECT_EQ(run("optimize --config /nonexistent/pnpe.cfg").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Exit, ThresholdFailure) {
  // Lossy heralding moves the simulated column away from the reference values.
  EXPECT_EQ(run("table-s1 --set loss.eta_H=0.5").code, 3);
}

TEST(TableS1, AllRowsWithinTolerance) {
  const auto r = run("table-s1");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 11u);
  const auto& h = rows[0];
  const auto d = column(h, "delta"), ss = column(h, "S_simulated"), ref = column(h, "S_reference");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    EXPECT_LE(std::abs(std::stod(rows[k][d])), 1e-3);
    EXPECT_NEAR(std::stod(rows[k][ss]) - std::stod(rows[k][ref]), std::stod(rows[k][d]), 1e-8);
  }
  EXPECT_EQ(rows[10][ref], "2.685871");
}

TEST(TableS1, SingleRowAndVerification) {
  const auto r = run("table-s1 --eta 0.9 --verify-optimizer");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][column(rows[0], "optimizer_ok")], "1");
  EXPECT_GE(std::stod(rows[1][column(rows[0], "S_optimized")]), 2.314);
}

TEST(Output, CsvHeaderBlock) {
  const auto r = run("optimize --eta 0.8");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# pnpe ", 0), 0u);
  EXPECT_NE(r.out.find("# command: optimize\n"), std::string::npos);
  EXPECT_NE(r.out.find("# config_hash: fnv1a64:"), std::string::npos);
  EXPECT_NE(r.out.find("# units: "), std::string::npos);
  EXPECT_NE(r.out.find("# config run.seed=20240611\n"), std::string::npos);
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(std::stod(rows[1][column(rows[0], "S")]), 2.08);
}

TEST(Output, JsonDocument) {
  const auto r = run("table-s1 --format json");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["metadata"]["command"], "table-s1");
  EXPECT_EQ(doc["metadata"]["config"]["run.format"], "json");
  ASSERT_EQ(doc["rows"].size(), 10u);
  EXPECT_NEAR(doc["rows"][9]["S_reference"].get<double>(), 2.685871, 1e-12);
  EXPECT_EQ(doc["metadata"]["units"]["eta_D"], "1");
}

TEST(Output, DeterministicAcrossRuns) {
  const auto a = run("sweep-eta --grid 0.7:0.9:0.1");
  const auto b = run("sweep-eta --grid 0.7:0.9:0.1");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = run("optimize --eta 0.8 --seed 7");
  EXPECT_NE(c.out, run("optimize --eta 0.8").out);
  EXPECT_EQ(c.out, run("optimize --eta 0.8 --seed 7").out);
}

TEST(Output, OutFileMatchesStdout) {
  const auto path = std::filesystem::temp_directory_path() / "pnpe_cli_test_out.csv";
  ASSERT_EQ(run("di-metrics --out " + path.string()).code, 0);
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  EXPECT_EQ(ss.str(), run("di-metrics").out);
  std::filesystem::remove(path);
}

TEST(Config, FileOverridesAndHash) {
  const auto path = std::filesystem::temp_directory_path() / "pnpe_cli_test.cfg";
  {
    std::ofstream os(path);
    os << "# lower budget\noptimizer.restarts = 4\n\nrun.seed=99  # trailing comment\n";
  }
  const auto r = run("optimize --eta 0.8 --config " + path.string());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("# config optimizer.restarts=4\n"), std::string::npos);
  EXPECT_NE(r.out.find("# config run.seed=99\n"), std::string::npos);
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows[1][column(rows[0], "restarts")], "4");
  const auto hash = [](const std::string& s) { return s.substr(s.find("config_hash"), 40); };
  EXPECT_NE(hash(r.out), hash(run("optimize --eta 0.8").out));
  std::filesystem::remove(path);
}

TEST(Commands, SuccessProbability) {
  const auto r = run("success-prob");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 42u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_EQ(rows[k][column(rows[0], "ordering_ok")], "1");
  const auto pos = r.out.find("# hybrid_slope_1e-4_to_1e-2: ");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(pos + 29)), 0.5, 0.01);
}

TEST(Commands, DeviceIndependentMetrics) {
  const auto r = run("di-metrics --grid 0.9:1:0.05");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 7u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double h = std::stod(rows[k][column(rows[0], "H_min")]);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0);
  }
}

TEST(Commands, CompareStates) {
  const auto r = run("compare-states");
  ASSERT_EQ(r.code, 0);
  const auto pos = r.out.find("# psi_threshold: ");
  ASSERT_NE(pos, std::string::npos);
  const double psi = std::stod(r.out.substr(pos + 17));
  EXPECT_GE(psi, 0.82);
  EXPECT_LE(psi, 0.83);
  const auto grid = run("compare-states --loss-grid");
  ASSERT_EQ(grid.code, 0);
  const auto rows = csv_rows(grid.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"eta_H", "eta_D", "S_fixed", "S_low_gain"}));
}

TEST(Helpers, GridsAndTriplets) {
  using namespace pnpe::cli;
  const auto g = linear_grid(0.6, 1.0, 0.1);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.back(), 1.0);
  const auto lg = log_grid(1e-4, 1e-2, 3);
  ASSERT_EQ(lg.size(), 3u);
  EXPECT_NEAR(lg[1], 1e-3, 1e-15);
  EXPECT_THROW(parse_triplet("0.1:0.2"), ConfigError);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(csv_quote("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_quote("say \"hi\""), "\"say \"\"hi\"\"\"");
}
