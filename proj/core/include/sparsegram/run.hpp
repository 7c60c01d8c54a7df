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
#ifndef SPARSEGRAM_RUN_HPP
#define SPARSEGRAM_RUN_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sparsegram/gramian.hpp"
#include "sparsegram/metrics.hpp"
#include "sparsegram/model.hpp"
#include "sparsegram/oracle.hpp"
#include "sparsegram/solver.hpp"

namespace sparsegram {

using Json = nlohmann::json;

/// Relative gap |J_relaxed - J_oracle| / (1 + |J_oracle|) accepted as equal.
inline constexpr double kEquivalenceTol = 1e-8;

struct OutputPaths {
  std::string report;
  std::string schedule;
  std::string switching;
  std::string trajectory;
  std::string eigenvalues;
  std::string objective_trace;
};

/// A batch instance. Built from a JSON document of the form
///
///   {
///     "system":  {"A": [[...], ...], "B": [[...], ...], "T": 1.0},
///     "grid":    {"N": 16},
///     "budgets": {"alpha": [...], "beta": 1},
///     "metric":  {"kind": "log_det", "epsilon": 1e-8, "eig_gap_tol": 1e-8},
///     "solver":  {"methods": ["projected_gradient", "fixed_point"], "max_iters": 500,
///                 "step_size": 1.0, "adaptive_step": true, "damping": 0.5,
///                 "convergence_tol": 1e-9, "threshold_bisection_tol": 1e-10,
///                 "seed": 0, "assumption_tol": 1e-9, "discreteness_tol": 1e-3,
///                 "repair": true},
///     "targets": [[1, 0], [0, 1]],
///     "outputs": {"report_path": "...", "schedule_path": "...", "switching_path": "...",
///                 "trajectory_path": "...", "eigenvalue_path": "...",
///                 "objective_trace_path": "..."},
///     "oracle":  {"enabled": true}
///   }
///
/// Only system, grid and budgets are required.
struct RunConfig {
  LtiSystem system;
  int intervals = 1;
  Budgets budgets;
  MetricSpec metric;
  std::vector<SolverMethod> methods{SolverMethod::kProjectedGradient};
  SolverOptions solver;
  bool repair = true;
  std::vector<Vector> targets;
  OutputPaths outputs;
  bool oracle_enabled = false;
  Json source;

  TimeGrid grid() const { return TimeGrid(system.horizon, intervals); }
};

/// Parses JSON text; syntax errors are reported with line and column.
Json parse_config_text(std::string_view text, std::string_view origin = "<config>");

/// Applies `dotted.key=value`; value is read as JSON when it parses, else as a string.
void apply_override(Json& doc, std::string_view assignment);

/// Throws kConfigParse naming the offending key.
RunConfig parse_config(const Json& doc);

struct EnergyEntry {
  Vector target;
  std::optional<EnergyResult> result;
  std::string error;
};

struct RunReport {
  std::vector<SolverReport> solves;
  std::vector<std::optional<Schedule>> repaired;
  std::optional<GramianTrajectory> trajectory;  // of the first solve's schedule
  std::optional<OracleResult> oracle;
  std::vector<EnergyEntry> energies;
  Json document;  // serialized report; "timings" holds the only nondeterministic fields
};

/// validate -> solve (each method) -> diagnostics -> repair -> oracle ->
/// min_energy. Errors are rethrown with the failing stage named. Writes no
/// files.
RunReport run(const RunConfig& config);

/// Brute force only.
Json run_oracle(const RunConfig& config);

/// Assumption and PMP diagnostics for a user-supplied schedule. Thresholds
/// are fitted to the schedule's own switching scores.
Json check_schedule(const RunConfig& config, const Schedule& sch);

/// Writes the report JSON and the requested schedule and trajectory CSVs.
void write_outputs(const RunReport& report, const OutputPaths& paths);

/// Switching-function, Gramian-eigenvalue and objective-trace CSVs.
void emit_plot_data(const RunReport& report, const OutputPaths& paths);

Json to_json(const Schedule& sch);
Json to_json(const AssumptionReport& rep);
Json to_json(const PmpResiduals& res);
Json to_json(const SolverReport& rep);
Json to_json(const OracleResult& res);

}  // namespace sparsegram

#endif  // SPARSEGRAM_RUN_HPP
