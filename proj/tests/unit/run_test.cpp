/*
 Copyright 2026 The sparsegram Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "sparsegram/run.hpp"

#include <filesystem>

#include <gtest/gtest.h>

#include "sparsegram/csv.hpp"
#include "sparsegram/error.hpp"
#include "testing.hpp"

namespace sparsegram {
namespace {

using testing::error_code_of;

const std::filesystem::path kData = SPARSEGRAM_TEST_DATA_DIR;

Json load(const std::string& name) {
  const std::filesystem::path path = kData / name;
  return parse_config_text(read_text_file(path), path.string());
}

Json minimal() {
  return Json::parse(R"({"system": {"A": [[0]], "B": [[1]], "T": 1.0},
                         "grid": {"N": 2},
                         "budgets": {"alpha": [0.5], "beta": 1}})");
}

Json without_timings(Json doc) {
  doc.erase("timings");
  return doc;
}

TEST(ParseConfig, MinimalDefaults) {
  const RunConfig cfg = parse_config(minimal());
  EXPECT_EQ(cfg.intervals, 2);
  EXPECT_EQ(cfg.metric.kind, MetricKind::kTrace);
  EXPECT_FALSE(cfg.oracle_enabled);
  ASSERT_EQ(cfg.methods.size(), 1u);
  EXPECT_TRUE(cfg.repair);
}

TEST(ParseConfig, ErrorsNameTheKey) {
  struct Case {
    const char* assignment;
    const char* key;
  };
  const Case cases[] = {
      {"grid.N=0", "grid.N"},
      {"grid.N=1.5", "grid.N"},
      {"budgets.alpha=[0.5, 0.5]", "budgets"},
      {"metric.kind=\"volume\"", "metric.kind"},
      {"solver.methods=[\"newton\"]", "solver.methods[0]"},
      {"solver.max_iters=0", "solver"},
      {"system.T=-1", "system"},
      {"targets=[[1, 2]]", "targets[0]"},
      {"oracle.enabled=3", "oracle.enabled"},
  };
  for (const Case& c : cases) {
    Json doc = minimal();
    apply_override(doc, c.assignment);
    std::string msg;
    EXPECT_EQ(error_code_of([&] { parse_config(doc); }, &msg), ErrorCode::kConfigParse) << c.assignment;
    EXPECT_NE(msg.find(std::string("'") + c.key + "'"), std::string::npos) << msg;
  }
  Json doc = minimal();
  doc.erase("grid");
  std::string msg;
  EXPECT_EQ(error_code_of([&] { parse_config(doc); }, &msg), ErrorCode::kConfigParse);
  EXPECT_NE(msg.find("'grid'"), std::string::npos) << msg;
}

TEST(ParseConfig, FractionalBetaMentionsInteger) {
  std::string msg;
  EXPECT_EQ(error_code_of([&] { parse_config(load("bad_beta.json")); }, &msg), ErrorCode::kConfigParse);
  EXPECT_NE(msg.find("integer"), std::string::npos) << msg;
}

TEST(ParseConfigText, SyntaxErrorHasLineAndColumn) {
  std::string msg;
  EXPECT_EQ(error_code_of([&] { load("malformed.json"); }, &msg), ErrorCode::kConfigParse);
  EXPECT_NE(msg.find("malformed.json:4:"), std::string::npos) << msg;
}

TEST(ParseConfigText, AcceptsComments) {
  const Json doc = parse_config_text("{\n  // horizon\n  \"T\": 2\n}");
  EXPECT_EQ(doc["T"], 2);
}

TEST(ApplyOverride, Examples) {
  Json doc = minimal();
  apply_override(doc, "solver.max_iters=100");
  apply_override(doc, "metric.kind=trace");
  apply_override(doc, "budgets.alpha=[0.25]");
  EXPECT_EQ(doc["solver"]["max_iters"], 100);
  EXPECT_EQ(doc["metric"]["kind"], "trace");
  EXPECT_EQ(parse_config(doc).budgets.alpha(0), 0.25);
  EXPECT_EQ(error_code_of([&] { apply_override(doc, "max_iters"); }), ErrorCode::kConfigParse);
  EXPECT_EQ(error_code_of([&] { apply_override(doc, "=3"); }), ErrorCode::kConfigParse);
  EXPECT_EQ(error_code_of([&] { apply_override(doc, "solver..x=3"); }), ErrorCode::kConfigParse);
}

TEST(Run, ZeroDynamicsMatchesOracle) {
  const RunReport rep = run(parse_config(load("zero_dynamics.json")));
  ASSERT_EQ(rep.solves.size(), 2u);
  ASSERT_TRUE(rep.oracle.has_value());
  EXPECT_NEAR(rep.oracle->best_value, 1.0, 1e-12);
  const Json& eq = rep.document.at("equivalence");
  EXPECT_LE(eq["relative_gap"].get<double>(), 1e-8);
  EXPECT_TRUE(eq["equivalent"].get<bool>());
  for (const SolverReport& s : rep.solves) {
    EXPECT_NEAR(s.objective, 1.0, 1e-10);
    EXPECT_FALSE(s.assumption.pass);
  }
}

TEST(Run, DoubleIntegratorReport) {
  const RunReport rep = run(parse_config(load("double_integrator.json")));
  const Json& doc = rep.document;
  EXPECT_LE(doc["equivalence"]["relative_gap"].get<double>(), 1e-8);
  ASSERT_EQ(rep.energies.size(), 2u);
  for (const EnergyEntry& e : rep.energies) {
    ASSERT_TRUE(e.result.has_value()) << e.error;
    EXPECT_GT(e.result->energy, 0.0);
  }
  for (const Json& s : doc["solves"]) {
    EXPECT_TRUE(s.contains("repaired"));
    EXPECT_TRUE(s["schedule"]["binary"].get<bool>());
  }
}

TEST(Run, OracleTooLargeNamesStage) {
  std::string msg;
  EXPECT_EQ(error_code_of([&] { run(parse_config(load("too_large.json"))); }, &msg),
            ErrorCode::kInstanceTooLarge);
  EXPECT_NE(msg.find("stage 'oracle'"), std::string::npos) << msg;
}

TEST(Run, DeterministicApartFromTimings) {
  const RunConfig cfg = parse_config(load("double_integrator.json"));
  EXPECT_EQ(without_timings(run(cfg).document), without_timings(run(cfg).document));
}

TEST(Run, EquivalenceOnlyWithOracle) {
  Json doc = load("double_integrator.json");
  EXPECT_TRUE(run(parse_config(doc)).document.contains("equivalence"));
  doc["oracle"]["enabled"] = false;
  const RunReport rep = run(parse_config(doc));
  EXPECT_FALSE(rep.document.contains("equivalence"));
  EXPECT_FALSE(rep.document.contains("oracle"));
}

TEST(RunOracle, ReportsMaximizers) {
  const Json out = run_oracle(parse_config(load("zero_dynamics.json")));
  EXPECT_NEAR(out["oracle"]["best_value"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(out["oracle"]["best_schedules"].size(), 2u);
}

TEST(CheckSchedule, DoubleIntegratorSchedule) {
  const RunConfig cfg = parse_config(load("double_integrator.json"));
  const Schedule sch = schedule_from_csv(read_text_file(kData / "di_schedule.csv"), cfg.grid());
  const Json out = check_schedule(cfg, sch);
  EXPECT_TRUE(out["feasible"].get<bool>());
  EXPECT_EQ(out["discreteness_fraction"].get<double>(), 1.0);
  EXPECT_TRUE(out["assumption"]["pass"].get<bool>());
  EXPECT_GE(out["pmp"]["maximum_condition_gap"].get<double>(), 0.0);
}

TEST(Outputs, WritesRequestedFiles) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "sparsegram_run_test";
  std::filesystem::remove_all(dir);
  OutputPaths paths;
  paths.report = (dir / "report.json").string();
  paths.schedule = (dir / "schedule.csv").string();
  paths.switching = (dir / "switching.csv").string();
  paths.trajectory = (dir / "trajectory.csv").string();
  paths.eigenvalues = (dir / "eig.csv").string();
  paths.objective_trace = (dir / "trace.csv").string();
  const RunConfig cfg = parse_config(load("double_integrator.json"));
  const RunReport rep = run(cfg);
  write_outputs(rep, paths);
  emit_plot_data(rep, paths);

  const Json reread = Json::parse(read_text_file(paths.report));
  EXPECT_EQ(reread["solves"][0]["objective"].get<double>(), rep.solves[0].objective);
  const Schedule sch = schedule_from_csv(read_text_file(paths.schedule), cfg.grid());
  EXPECT_EQ(sch.values(), rep.solves[0].schedule.values());
  EXPECT_EQ(read_text_file(paths.switching).rfind("t_mid,q_1,q_2\n", 0), 0u);
  EXPECT_EQ(read_text_file(paths.eigenvalues).rfind("t,lambda_1,lambda_2\n", 0), 0u);

  std::istringstream trace(read_text_file(paths.objective_trace));
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "iteration,objective");
  double previous = -std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(trace, line)) {
    const double value = std::stod(line.substr(line.find(',') + 1));
    EXPECT_GE(value, previous - 1e-12);
    previous = value;
    ++rows;
  }
  EXPECT_GT(rows, 0);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace sparsegram
