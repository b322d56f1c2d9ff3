#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lehmer/cli.hpp"

using namespace lehmer_mean;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> cells;
    std::istringstream cl(line);
    std::string cell;
    while (std::getline(cl, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("lehmer_cli_test_" + name);
}

}  // namespace

TEST(CliEval, Examples) {
  auto r = run({"eval", "-x", "0.5,2.5", "-p", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "p,L\n1,1.5\n");
  r = run({"eval", "-x", "3", "-p", "7"});
  EXPECT_EQ(r.out, "p,L\n7,3\n");
}

TEST(CliEval, RangeIsMonotone) {
  const auto r = run({"eval", "-x", "1,2,3", "--p-range", "-10:10:0.1"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 202u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"p", "L"}));
  double prev = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double l = std::stod(rows[i][1]);
    EXPECT_GE(l, prev);
    prev = l;
  }
  EXPECT_DOUBLE_EQ(std::stod(rows.back()[0]), 10.0);
}

TEST(CliEval, Errors) {
  EXPECT_EQ(run({"eval", "-x", "1,2", "-p", "1", "--p-range", "0:1:0.5"}).code, 1);
  EXPECT_EQ(run({"eval", "-x", "1,2"}).code, 1);
  EXPECT_EQ(run({"eval", "-x", "1,abc", "-p", "1"}).code, 1);
  EXPECT_EQ(run({"eval", "-x", "1,-2", "-p", "1"}).code, 2);
  EXPECT_EQ(run({"eval", "-p", "1"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const auto r = run({"eval", "-x", "1,2", "-p", "1", "--p-range", "0:1:0.5"});
  EXPECT_TRUE(r.out.empty());
  EXPECT_FALSE(r.err.empty());
}

TEST(CliEval, FileInput) {
  const auto path = temp_path("values.txt");
  {
    std::ofstream f(path);
    f << "# value,weight\n0.5,2\n2.5,1\n\n";
  }
  const auto r = run({"--json", "eval", "--file", path.string(), "-p", "1.4306765580733931"});
  std::filesystem::remove(path);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["results"]["rows"][0]["L"].get<double>(), 1.5, 1e-10);
  EXPECT_EQ(j["inputs"]["spec"]["weights"][0].get<double>(), 2.0);
}

TEST(CliDeriv, Examples) {
  auto r = run({"deriv", "-x", "0.5,2.5", "-p", "1", "--order", "2"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "L''(1) = 0\n");
  r = run({"deriv", "-x", "5,5", "-p", "3", "--order", "1"});
  EXPECT_EQ(r.out, "L'(3) = 0\n");
  r = run({"--json", "deriv", "-x", "1,2,3", "-p", "1", "--order", "2", "-v"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["results"]["value"].get<double>(), -0.0351, 1e-4);
  EXPECT_NEAR(j["results"]["finite_difference"].get<double>(), j["results"]["value"].get<double>(), 1e-8);
  EXPECT_EQ(run({"deriv", "-x", "1,2", "-p", "1", "--order", "3"}).code, 1);
}

TEST(CliInflect, Examples) {
  auto r = run({"inflect", "-x", "0.5,2.5"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("roots: 1\n  p*=1 "), std::string::npos) << r.out;
  r = run({"inflect", "-x", "1,2,3"});
  EXPECT_NE(r.out.find("p*=0.707775"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("side: below_one"), std::string::npos);
  r = run({"--json", "inflect", "-x", "1.0259,1.0241,1.0244,0.96"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["results"]["count"], 3);
  const double expected[] = {-15.81, 203.92, 401.39};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(j["results"]["roots"][i]["p_star"].get<double>(), expected[i], 0.01);
  EXPECT_EQ(j["results"]["parity_ok"], true);
  EXPECT_EQ(j["results"]["bound_j"], 15);
}

TEST(CliInflect, ExitCodes) {
  auto r = run({"inflect", "-x", "2,2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("constant"), std::string::npos);
  r = run({"inflect", "-x", "1.0259,1.0241,1.0244,0.96", "--max-half-width", "64"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("roots: 1"), std::string::npos) << "partial report is still printed";
  EXPECT_EQ(run({"inflect", "-x", "1,2", "--tol", "0"}).code, 1);
  EXPECT_EQ(run({"--precision", "quad", "inflect", "-x", "1,2"}).code, 1);
}

TEST(CliInflect, PrecisionFlag) {
  const auto r = run({"--json", "--precision", "extended", "inflect", "-x", "0.5,2.5"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["inputs"]["precision"], "extended");
  EXPECT_EQ(j["results"]["precision"], "extended");
  EXPECT_NEAR(j["results"]["roots"][0]["p_star"].get<double>(), 1.0, 1e-8);
}

TEST(CliBound, Examples) {
  EXPECT_EQ(run({"bound", "2"}).out, "J=1 N=2\n");
  EXPECT_EQ(run({"bound", "3"}).out, "J=5 N=7\n");
  EXPECT_EQ(run({"bound", "4"}).out, "J=15 N=16\n");
  EXPECT_EQ(run({"bound", "1"}).code, 1);
}

TEST(CliSearch, DeterministicJson) {
  const std::vector<std::string> args{"--json", "--seed", "7", "search", "-n", "4", "--trials", "25"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j["inputs"]["seed"], 7);
  EXPECT_EQ(j["results"]["trials"], 25);
  EXPECT_NE(a.err.find("trials=25"), std::string::npos);
}

TEST(CliSearch, PairsAndPinned) {
  auto r = run({"search", "-n", "2", "--min-roots", "3", "--trials", "300"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("hits=0"), std::string::npos);
  r = run({"--json", "search", "-n", "4", "--pin", "1.0259,1.0241,1.0244,0.96"});
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  ASSERT_EQ(j["results"]["hit_count"], 1);
  EXPECT_EQ(j["results"]["hits"][0]["report"]["count"], 3);
  EXPECT_EQ(run({"search", "--dist", "gamma:1:2"}).code, 1);
  EXPECT_EQ(run({"search", "--trials", "0"}).code, 1);
}

TEST(CliVerify, ScopesPass) {
  auto r = run({"verify", "--scope", "n3", "--seed", "42", "--samples", "50"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("seed: 42"), std::string::npos);
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  r = run({"verify", "--scope", "monotonicity", "--samples", "50"});
  EXPECT_EQ(r.code, 0);
  r = run({"--json", "verify", "--scope", "figures"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(json::parse(r.out)["results"]["passed"], true);
  EXPECT_EQ(run({"verify", "--scope", "nope"}).code, 1);
}

TEST(CliFigureData, FigureOne) {
  const auto r = run({"figure-data", "1"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"p", "L", "d2L", "root"}));
  int roots = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][3] != "1") continue;
    ++roots;
    EXPECT_NEAR(std::stod(rows[i][0]), 1.0, 1e-8);
    EXPECT_NEAR(std::stod(rows[i][1]), 1.5, 1e-8);
  }
  EXPECT_EQ(roots, 1);
  EXPECT_DOUBLE_EQ(std::stod(rows[1][0]), -4.0);
  EXPECT_DOUBLE_EQ(std::stod(rows.back()[0]), 5.0);
}

TEST(CliFigureData, FigureTwoSingleZeroCrossing) {
  const auto r = run({"figure-data", "2"});
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  int crossings = 0;
  double prev = std::stod(rows[1][2]);
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (rows[i][3] == "1") {
      EXPECT_NEAR(std::stod(rows[i][0]), 0.707, 5e-3);
      continue;
    }
    const double cur = std::stod(rows[i][2]);
    if ((prev > 0) != (cur > 0)) ++crossings;
    prev = cur;
  }
  EXPECT_EQ(crossings, 1);
  // A second table follows after a blank line.
  EXPECT_NE(r.out.find("\np,tilde_l,root\n"), std::string::npos);
}

TEST(CliFigureData, FigureThreeBoundedAndWrittenToDirectory) {
  const auto dir = temp_path("fig3");
  std::filesystem::remove_all(dir);
  const auto r = run({"--output", dir.string(), "figure-data", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream f(dir / "figure3.csv");
  std::stringstream buf;
  buf << f.rdbuf();
  const auto rows = csv_rows(buf.str());
  std::filesystem::remove_all(dir);
  ASSERT_GT(rows.size(), 6000u);
  int roots = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double l = std::stod(rows[i][1]);
    EXPECT_GE(l, 0.96);
    EXPECT_LE(l, 1.0259);
    roots += rows[i][3] == "1";
  }
  EXPECT_EQ(roots, 3);
  EXPECT_EQ(run({"figure-data", "4"}).code, 1);
}

TEST(CliJson, RoundTripsAndTimestampIsOptIn) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"--json", "bound", "4"},
           {"--json", "eval", "-x", "1,2,3", "--p-range", "0:1:0.25"},
           {"--json", "inflect", "-x", "1,2,3"},
           {"--json", "verify", "--scope", "bound"}}) {
    const auto r = run(args);
    ASSERT_EQ(r.code, 0);
    const auto rec = OutputRecord::from_json(json::parse(r.out));
    EXPECT_EQ(rec.render(), r.out);
    EXPECT_FALSE(json::parse(r.out).contains("timestamp"));
  }
  const auto r = run({"--json", "--timestamp", "bound", "2"});
  EXPECT_TRUE(json::parse(r.out).contains("timestamp"));
  EXPECT_THROW(OutputRecord::from_json(json::parse(R"({"schema_version":"2"})")), usage_error);
}

TEST(CliJson, DoublesRoundTripExactly) {
  const auto r = run({"--json", "deriv", "-x", "1,2,3", "-p", "2"});
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["results"]["value"].get<double>(), second_derivative(make_spec({1.0, 2.0, 3.0}), 2.0));
}
