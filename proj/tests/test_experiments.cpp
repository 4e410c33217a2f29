// Copyright 2026 The falqon-mst Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "falqon_mst/falqon_mst.hpp"

namespace {

using namespace falqon_mst;
namespace ex = falqon_mst::experiments;
namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("falqon_mst_exp_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) row.push_back(field);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(row);
  }
  return rows;
}

int run_cli(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(FALQON_MST_CLI) + " " + args + " > " + stdout_file.string() + " 2>&1";
  return std::system(cmd.c_str());
}

ex::ExperimentConfig small_config() {
  ex::ExperimentConfig c;
  c.dataset = "iris";
  c.runs = 4;
  c.layers = 60;
  c.seed = 5;
  return c;
}

TEST(Config, JsonRoundTripAndUnknownField) {
  ex::ExperimentConfig c;
  ex::apply_json(c, nlohmann::json::parse(R"({"dataset":"heart","runs":7,"dt":0.02,"layers":50,"methods":["prim"]})"));
  EXPECT_EQ(c.dataset, "heart");
  EXPECT_EQ(c.runs, 7u);
  EXPECT_EQ(c.dt, 0.02);
  EXPECT_FALSE(c.wants("falqon-pubo"));
  ex::ExperimentConfig back;
  ex::apply_json(back, ex::to_json(c));
  EXPECT_EQ(ex::to_json(back).dump(), ex::to_json(c).dump());
  EXPECT_THROW(ex::apply_json(c, nlohmann::json::parse(R"({"layer":5})")), std::invalid_argument);
  c.methods = {"kruskal"};
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(SuccessRate, ReportAgreesWithRunsCsv) {
  ScopedDiagnosticCapture capture;
  const auto c = small_config();
  const auto ds = data::load_named("iris");
  const auto out = ex::success_rate(c, ds);
  const auto rows = parse_csv(out.runs_csv);
  ASSERT_EQ(rows.size(), c.runs + 1);
  EXPECT_EQ(rows[0].size(), 11u);
  double succ = 0, top = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    EXPECT_EQ(std::stoull(rows[r][1]), derive_run_seed(c.seed, r - 1));
    succ += std::stod(rows[r][9]);
    top += std::stod(rows[r][10]);
  }
  EXPECT_DOUBLE_EQ(out.report["success_rate"].get<double>(), succ / c.runs);
  EXPECT_DOUBLE_EQ(out.report["top_k_rate"].get<double>(), top / c.runs);
  EXPECT_LE(out.report["success_rate"].get<double>(), out.report["top_k_rate"].get<double>());
}

TEST(SuccessRate, IndependentOfThreadCount) {
  ScopedDiagnosticCapture capture;
  auto c = small_config();
  c.runs = 2;
  const auto ds = data::load_named("iris");
#ifdef _OPENMP
  const int before = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = ex::success_rate(c, ds);
  omp_set_num_threads(4);
  const auto many = ex::success_rate(c, ds);
  omp_set_num_threads(before);
#else
  const auto one = ex::success_rate(c, ds);
  const auto many = ex::success_rate(c, ds);
#endif
  EXPECT_EQ(one.runs_csv, many.runs_csv);
  EXPECT_EQ(one.report.dump(), many.report.dump());
}

TEST(Accuracy, ReportAgreesWithRunsCsv) {
  ScopedDiagnosticCapture capture;
  auto c = small_config();
  c.runs = 6;
  const auto ds = data::load_named("iris");
  const auto out = ex::accuracy(c, ds);
  const auto rows = parse_csv(out.runs_csv);
  ASSERT_EQ(rows.size(), c.runs + 1);
  double prim = 0, pubo = 0;
  std::size_t fallback = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    prim += std::stod(rows[r][4]);
    pubo += std::stod(rows[r][5]);
    fallback += rows[r][10] == "1";
    if (rows[r][9] == "1") {
      EXPECT_EQ(rows[r][4], rows[r][5]);  // same tree, same classifier
    }
  }
  EXPECT_NEAR(out.report["mean_accuracy"]["prim"].get<double>(), prim / c.runs, 1e-15);
  EXPECT_NEAR(out.report["mean_accuracy"]["falqon-pubo"].get<double>(), pubo / c.runs, 1e-15);
  EXPECT_EQ(out.report["fallback_runs"].get<std::size_t>(), fallback);
}

TEST(Accuracy, PrimOnlySkipsQuantumRuns) {
  auto c = small_config();
  c.methods = {"prim"};
  c.runs = 20;
  const auto out = ex::accuracy(c, data::load_named("iris"));
  EXPECT_TRUE(out.report["mean_accuracy"].contains("prim"));
  EXPECT_FALSE(out.report["mean_accuracy"].contains("falqon-pubo"));
}

TEST(Trace, OneLayerHasZeroBeta) {
  ScopedDiagnosticCapture capture;
  auto c = small_config();
  c.layers = 1;
  const auto out = ex::trace(c, ex::trace_samples(c));
  const auto rows = parse_csv(out.trace_csv);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"layer", "beta", "energy"}));
  EXPECT_EQ(rows[1][0], "1");
  EXPECT_EQ(std::stod(rows[1][1]), 0.0);
  EXPECT_EQ(out.result["top_states"].size(), 10u);
}

TEST(Trace, TwoVertexToyConvergesBelowUniformMean) {
  ScopedDiagnosticCapture capture;
  auto c = small_config();
  c.layers = 2000;
  std::vector<Sample> toy{{{0.0, 0.0}, 0, 0}, {{1.0, 1.0}, 1, 1}};
  const auto out = ex::trace(c, toy);
  const auto rows = parse_csv(out.trace_csv);
  ASSERT_EQ(rows.size(), 2001u);
  const ex::Instance inst(toy, c);
  double mean = 0;
  for (std::size_t k = 0; k < inst.diagonal.size(); ++k) mean += inst.diagonal[k];
  mean /= double(inst.diagonal.size());
  const double final_energy = out.result["final_energy"].get<double>();
  EXPECT_LT(final_energy, mean);
  EXPECT_GE(final_energy, inst.diagonal.min() - 1e-12);
  EXPECT_EQ(inst.layout.total(), 5u);
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir_ = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
};

TEST_F(Cli, MstOfTriangle) {
  std::ofstream(dir_ / "w.csv") << "0,1,2\n1,0,3\n2,3,0\n";
  ASSERT_EQ(run_cli("mst --weights " + (dir_ / "w.csv").string(), dir_ / "out.txt"), 0);
  EXPECT_EQ(slurp(dir_ / "out.txt"), "0 1 1\n0 2 2\nweight 3\n");
}

TEST_F(Cli, DecodeAllZeroReportsNoRoot) {
  std::ofstream(dir_ / "w.csv") << "0,1,2\n1,0,3\n2,3,0\n";
  ASSERT_EQ(run_cli("decode --weights " + (dir_ / "w.csv").string() + " --bits 000000000", dir_ / "out.json"), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "out.json"));
  EXPECT_FALSE(j["valid"].get<bool>());
  bool no_root = false;
  for (const auto& v : j["violations"]) no_root = no_root || v["message"].get<std::string>().find("no root") != std::string::npos;
  EXPECT_TRUE(no_root);
}

TEST_F(Cli, DecodeValidMstEncoding) {
  std::ofstream(dir_ / "w.csv") << "0,1,2\n1,0,3\n2,3,0\n";
  std::ifstream in(dir_ / "w.csv");
  const auto g = ex::read_weight_matrix(in);
  const VariableLayout layout(g);
  const auto s = encode_tree(g, layout, prim_mst(g).edges, 0);
  const auto bits = basis_to_text(s, static_cast<int>(layout.total()));
  ASSERT_EQ(run_cli("decode --weights " + (dir_ / "w.csv").string() + " --bits " + bits, dir_ / "out.json"), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "out.json"));
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_TRUE(j["violations"].empty());
  EXPECT_NEAR(j["energy"].get<double>(), 0.1 * 3.0, 1e-12);
}

TEST_F(Cli, DecodeRejectsWrongLength) {
  std::ofstream(dir_ / "w.csv") << "0,1\n1,0\n";
  EXPECT_NE(run_cli("decode --weights " + (dir_ / "w.csv").string() + " --bits 0101", dir_ / "out.txt"), 0);
  EXPECT_NE(slurp(dir_ / "out.txt").find("error:"), std::string::npos);
}

TEST_F(Cli, TraceWritesFiles) {
  ASSERT_EQ(run_cli("trace --dataset iris --layers 1 --out " + dir_.string(), dir_ / "stdout.txt"), 0);
  const auto rows = parse_csv(slurp(dir_ / "trace.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::stod(rows[1][1]), 0.0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "result.json"));
  for (const char* key : {"top_states", "final_energy", "ground_energy", "success", "in_top_k"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(Cli, FlagsOverrideConfig) {
  std::ofstream(dir_ / "c.json") << R"({"dataset":"iris","runs":50,"layers":5,"methods":["prim"]})";
  ASSERT_EQ(run_cli("accuracy --config " + (dir_ / "c.json").string() + " --runs 3 --out " + dir_.string(),
                    dir_ / "stdout.txt"),
            0);
  const auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(report["runs"].get<int>(), 3);
  EXPECT_EQ(parse_csv(slurp(dir_ / "runs.csv")).size(), 4u);
  EXPECT_TRUE(fs::exists(dir_ / "metadata.json"));
}

TEST_F(Cli, UnknownDatasetFails) {
  EXPECT_NE(run_cli("success-rate --dataset nope --runs 1 --out " + dir_.string(), dir_ / "stdout.txt"), 0);
}

}  // namespace
