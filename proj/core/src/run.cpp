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

#include <chrono>
#include <cmath>
#include <functional>

#include "sparsegram/adjoint.hpp"
#include "sparsegram/csv.hpp"
#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

[[noreturn]] void key_error(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::kConfigParse, "key '" + key + "': " + what);
}

const Json* find(const Json& obj, const std::string& name) {
  if (!obj.is_object()) return nullptr;
  const auto it = obj.find(name);
  return it == obj.end() ? nullptr : &*it;
}

const Json& require(const Json& obj, const std::string& name, const std::string& key) {
  const Json* v = find(obj, name);
  if (!v) key_error(key, "missing");
  return *v;
}

double as_number(const Json& v, const std::string& key) {
  if (!v.is_number()) key_error(key, "expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& key) {
  const double x = as_number(v, key);
  if (x != std::floor(x) || std::abs(x) > 1e9) key_error(key, "expected an integer");
  return static_cast<int>(x);
}

bool as_bool(const Json& v, const std::string& key) {
  if (!v.is_boolean()) key_error(key, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& key) {
  if (!v.is_string()) key_error(key, "expected a string");
  return v.get<std::string>();
}

Vector as_vector(const Json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) key_error(key, "expected a nonempty array of numbers");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = as_number(v[i], key + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix as_matrix(const Json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) key_error(key, "expected a row-major array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) key_error(key, "rows must be nonempty arrays");
  Matrix out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    const std::string row_key = key + "[" + std::to_string(r) + "]";
    if (!v[r].is_array() || v[r].size() != cols) {
      key_error(row_key, "expected " + std::to_string(cols) + " entries");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(v[r][c], row_key + "[" + std::to_string(c) + "]");
    }
  }
  return out;
}

template <typename F>
auto stage(std::string_view name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + std::string(name) + "': " + e.detail());
  }
}

Json vector_json(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r).transpose()));
  return rows;
}

double relative_gap(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

}  // namespace

Json parse_config_text(std::string_view text, std::string_view origin) {
  try {
    return Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw Error(ErrorCode::kConfigParse, std::string(origin) + ":" + std::to_string(line) + ":" +
                                             std::to_string(column) + ": malformed JSON");
  }
}

void apply_override(Json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorCode::kConfigParse,
                "override '" + std::string(assignment) + "' is not of the form key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string part = path.substr(start, dot - start);
    if (part.empty()) throw Error(ErrorCode::kConfigParse, "override key '" + path + "' is malformed");
    if (!node->is_object()) *node = Json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

RunConfig parse_config(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kConfigParse, "config must be a JSON object");
  RunConfig cfg;
  cfg.source = doc;

  const Json& system = require(doc, "system", "system");
  cfg.system.A = as_matrix(require(system, "A", "system.A"), "system.A");
  cfg.system.B = as_matrix(require(system, "B", "system.B"), "system.B");
  cfg.system.horizon = as_number(require(system, "T", "system.T"), "system.T");
  try {
    validate_system(cfg.system);
  } catch (const Error& e) {
    key_error("system", e.detail());
  }
  const int p = cfg.system.num_nodes();

  cfg.intervals = as_int(require(require(doc, "grid", "grid"), "N", "grid.N"), "grid.N");
  if (cfg.intervals < 1) key_error("grid.N", "must be at least 1");

  const Json& budgets = require(doc, "budgets", "budgets");
  cfg.budgets.alpha = as_vector(require(budgets, "alpha", "budgets.alpha"), "budgets.alpha");
  const double beta = as_number(require(budgets, "beta", "budgets.beta"), "budgets.beta");
  try {
    cfg.budgets.beta = checked_beta(beta);
    validate_budgets(cfg.budgets, p, cfg.system.horizon);
  } catch (const Error& e) {
    key_error("budgets", e.detail());
  }

  if (const Json* metric = find(doc, "metric")) {
    if (const Json* kind = find(*metric, "kind")) {
      try {
        cfg.metric.kind = parse_metric_kind(as_string(*kind, "metric.kind"));
      } catch (const Error& e) {
        key_error("metric.kind", e.detail());
      }
    }
    if (const Json* eps = find(*metric, "epsilon")) cfg.metric.epsilon = as_number(*eps, "metric.epsilon");
    if (const Json* gap = find(*metric, "eig_gap_tol")) {
      cfg.metric.eig_gap_tol = as_number(*gap, "metric.eig_gap_tol");
    }
    try {
      validate_metric(cfg.metric);
    } catch (const Error& e) {
      key_error("metric", e.detail());
    }
  }

  if (const Json* solver = find(doc, "solver")) {
    SolverOptions& o = cfg.solver;
    if (const Json* methods = find(*solver, "methods")) {
      if (!methods->is_array() || methods->empty()) key_error("solver.methods", "expected a nonempty array");
      cfg.methods.clear();
      for (std::size_t i = 0; i < methods->size(); ++i) {
        const std::string key = "solver.methods[" + std::to_string(i) + "]";
        try {
          cfg.methods.push_back(parse_solver_method(as_string((*methods)[i], key)));
        } catch (const Error& e) {
          key_error(key, e.detail());
        }
      }
    }
    if (const Json* m = find(*solver, "method")) {
      try {
        cfg.methods = {parse_solver_method(as_string(*m, "solver.method"))};
      } catch (const Error& e) {
        key_error("solver.method", e.detail());
      }
    }
    if (const Json* v = find(*solver, "max_iters")) o.max_iters = as_int(*v, "solver.max_iters");
    if (const Json* v = find(*solver, "step_size")) o.step_size = as_number(*v, "solver.step_size");
    if (const Json* v = find(*solver, "adaptive_step")) o.adaptive_step = as_bool(*v, "solver.adaptive_step");
    if (const Json* v = find(*solver, "damping")) o.damping = as_number(*v, "solver.damping");
    if (const Json* v = find(*solver, "convergence_tol")) {
      o.convergence_tol = as_number(*v, "solver.convergence_tol");
    }
    if (const Json* v = find(*solver, "threshold_bisection_tol")) {
      o.threshold_bisection_tol = as_number(*v, "solver.threshold_bisection_tol");
    }
    if (const Json* v = find(*solver, "seed")) {
      const int seed = as_int(*v, "solver.seed");
      if (seed < 0) key_error("solver.seed", "must be nonnegative");
      o.seed = static_cast<std::uint64_t>(seed);
    }
    if (const Json* v = find(*solver, "assumption_tol")) o.assumption_tol = as_number(*v, "solver.assumption_tol");
    if (const Json* v = find(*solver, "discreteness_tol")) {
      o.discreteness_tol = as_number(*v, "solver.discreteness_tol");
    }
    if (const Json* v = find(*solver, "repair")) cfg.repair = as_bool(*v, "solver.repair");
    try {
      validate_options(o);
    } catch (const Error& e) {
      key_error("solver", e.detail());
    }
  }

  if (const Json* targets = find(doc, "targets")) {
    if (!targets->is_array()) key_error("targets", "expected an array of state vectors");
    for (std::size_t i = 0; i < targets->size(); ++i) {
      const std::string key = "targets[" + std::to_string(i) + "]";
      Vector x = as_vector((*targets)[i], key);
      if (x.size() != cfg.system.state_dim()) key_error(key, "length must equal n");
      cfg.targets.push_back(std::move(x));
    }
  }

  if (const Json* outputs = find(doc, "outputs")) {
    auto path = [&](const char* name, std::string& dst) {
      if (const Json* v = find(*outputs, name)) {
        const std::string key = std::string("outputs.") + name;
        dst = as_string(*v, key);
        if (dst.empty()) key_error(key, "path must be nonempty");
      }
    };
    path("report_path", cfg.outputs.report);
    path("schedule_path", cfg.outputs.schedule);
    path("switching_path", cfg.outputs.switching);
    path("trajectory_path", cfg.outputs.trajectory);
    path("eigenvalue_path", cfg.outputs.eigenvalues);
    path("objective_trace_path", cfg.outputs.objective_trace);
  }

  if (const Json* oracle = find(doc, "oracle")) {
    if (const Json* enabled = find(*oracle, "enabled")) {
      cfg.oracle_enabled = as_bool(*enabled, "oracle.enabled");
    }
  }
  return cfg;
}

Json to_json(const Schedule& sch) {
  Json rows = Json::array();
  for (int k = 0; k < sch.intervals(); ++k) {
    Json row = Json::array({sch.grid().start(k)});
    for (int j = 0; j < sch.num_nodes(); ++j) row.push_back(sch(j, k));
    rows.push_back(std::move(row));
  }
  Json header = Json::array({"t_start"});
  for (int j = 0; j < sch.num_nodes(); ++j) header.push_back("v_" + std::to_string(j + 1));
  return Json{{"columns", header}, {"rows", rows}, {"binary", sch.is_binary()}};
}

Json to_json(const AssumptionReport& rep) {
  Json pairs = Json::array();
  for (const auto& [i, j] : rep.constant_pairs) pairs.push_back(Json::array({i + 1, j + 1}));
  return Json{{"pass", rep.pass},
              {"tolerance", rep.tolerance},
              {"node_range", vector_json(rep.node_range)},
              {"pair_range", matrix_json(rep.pair_range)},
              {"node_constant", rep.node_constant},
              {"constant_pairs", pairs}};
}

Json to_json(const PmpResiduals& res) {
  return Json{{"adjoint", res.adjoint},
              {"transversality", res.transversality},
              {"maximum_condition_gap", res.maximum_condition_gap},
              {"complementary_slackness", vector_json(res.complementary_slackness)},
              {"objective", res.objective}};
}

Json to_json(const SolverReport& rep) {
  return Json{{"method", to_string(rep.method)},
              {"objective", rep.objective},
              {"converged", rep.converged},
              {"iterations", rep.iterations},
              {"objective_trace", rep.objective_trace},
              {"thresholds", vector_json(rep.thresholds)},
              {"discreteness_fraction", rep.discreteness_fraction},
              {"ties", rep.ties},
              {"multiplicity_warning", rep.multiplicity_warning},
              {"assumption", to_json(rep.assumption)},
              {"pmp", to_json(rep.pmp)},
              {"schedule", to_json(rep.schedule)}};
}

Json to_json(const OracleResult& res) {
  Json maximizers = Json::array();
  for (const Schedule& s : res.best_schedules) maximizers.push_back(to_json(s));
  return Json{{"best_value", res.best_value},
              {"num_feasible", res.num_feasible},
              {"num_enumerated", res.num_enumerated},
              {"maximizers_truncated", res.maximizers_truncated},
              {"best_schedules", maximizers}};
}

RunReport run(const RunConfig& config) {
  using Clock = std::chrono::steady_clock;
  auto seconds = [](Clock::time_point since) {
    return std::chrono::duration<double>(Clock::now() - since).count();
  };
  RunReport rep;
  Json timings = Json::object();
  const TimeGrid grid = stage("validate", [&] {
    validate_system(config.system);
    validate_budgets(config.budgets, config.system.num_nodes(), config.system.horizon);
    validate_metric(config.metric);
    return config.grid();
  });

  Json solves = Json::array();
  for (SolverMethod method : config.methods) {
    const auto start = Clock::now();
    SolverOptions opts = config.solver;
    opts.method = method;
    SolverReport sr = stage("solve", [&] {
      return solve(config.system, config.metric, config.budgets, grid, opts);
    });
    Json entry = to_json(sr);
    std::optional<Schedule> repaired;
    if (config.repair) {
      repaired = stage("repair", [&] {
        return round_and_repair(sr.schedule, config.budgets, &sr.switching);
      });
      const double value = stage("repair", [&] {
        return evaluate(config.metric, propagate(config.system, *repaired).terminal());
      });
      entry["repaired"] = Json{{"objective", value}, {"schedule", to_json(*repaired)}};
    }
    timings[std::string(to_string(method))] = seconds(start);
    solves.push_back(std::move(entry));
    rep.solves.push_back(std::move(sr));
    rep.repaired.push_back(std::move(repaired));
  }

  rep.document["config"] = config.source;
  rep.document["solves"] = solves;
  if (!rep.solves.empty()) {
    rep.trajectory = stage("propagate", [&] {
      return propagate(config.system, rep.solves.front().schedule);
    });
  }

  if (config.oracle_enabled) {
    const auto start = Clock::now();
    rep.oracle = stage("oracle", [&] {
      return brute_force_binary(config.system, config.metric, config.budgets, grid);
    });
    timings["oracle"] = seconds(start);
    rep.document["oracle"] = to_json(*rep.oracle);
    Json verdict = Json::object();
    double worst = 0.0;
    Json per_method = Json::array();
    for (std::size_t i = 0; i < rep.solves.size(); ++i) {
      const double gap = relative_gap(rep.solves[i].objective, rep.oracle->best_value);
      Json m{{"method", to_string(rep.solves[i].method)}, {"relaxed_value", rep.solves[i].objective},
             {"relative_gap", gap}};
      if (rep.repaired[i]) {
        const double repaired_value = solves[i]["repaired"]["objective"].get<double>();
        m["repaired_relative_gap"] = relative_gap(repaired_value, rep.oracle->best_value);
      }
      worst = std::max(worst, gap);
      per_method.push_back(std::move(m));
    }
    verdict["oracle_value"] = rep.oracle->best_value;
    verdict["methods"] = per_method;
    verdict["relative_gap"] = worst;
    verdict["tolerance"] = kEquivalenceTol;
    verdict["equivalent"] = worst <= kEquivalenceTol;
    rep.document["equivalence"] = verdict;
  }

  if (!config.targets.empty() && rep.trajectory) {
    Json energies = Json::array();
    for (const Vector& x : config.targets) {
      EnergyEntry e{x, std::nullopt, {}};
      Json entry{{"target", vector_json(x)}};
      try {
        e.result = min_energy(rep.trajectory->terminal(), x);
        entry["energy"] = e.result->energy;
        entry["condition"] = e.result->condition;
      } catch (const Error& err) {
        e.error = err.what();
        entry["error"] = e.error;
      }
      energies.push_back(std::move(entry));
      rep.energies.push_back(std::move(e));
    }
    rep.document["min_energy"] = energies;
  }
  rep.document["timings"] = timings;
  return rep;
}

Json run_oracle(const RunConfig& config) {
  const OracleResult res = stage("oracle", [&] {
    return brute_force_binary(config.system, config.metric, config.budgets, config.grid());
  });
  return Json{{"config", config.source}, {"oracle", to_json(res)}};
}

Json check_schedule(const RunConfig& config, const Schedule& sch) {
  return stage("check", [&] {
    const GramianTrajectory traj = propagate(config.system, sch);
    const MetricGradient grad = gradient(config.metric, traj.terminal());
    const SwitchingProfile profile = switching_functions(config.system, grad.value, sch.grid());
    const ThresholdFit fit = fit_thresholds(profile.interval_average, config.budgets,
                                            sch.grid().step(), config.solver.threshold_bisection_tol);
    const FeasibilityReport feas = check_feasibility(sch, config.budgets, NormMode::kL1l1);
    const AssumptionReport assumption = check_assumption(profile, config.solver.assumption_tol);
    const PmpResiduals pmp = verify_pmp(config.system, config.metric, config.budgets, sch,
                                        fit.thresholds);
    return Json{{"objective", evaluate(config.metric, traj.terminal())},
                {"feasible", feas.ok()},
                {"worst_violation", feas.worst_violation},
                {"discreteness_fraction", discreteness_report(sch, config.solver.discreteness_tol)},
                {"thresholds", vector_json(fit.thresholds)},
                {"assumption", to_json(assumption)},
                {"pmp", to_json(pmp)}};
  });
}

void write_outputs(const RunReport& report, const OutputPaths& paths) {
  if (!paths.report.empty()) write_text_file(paths.report, report.document.dump(2) + "\n");
  if (!paths.schedule.empty() && !report.solves.empty()) {
    write_text_file(paths.schedule, schedule_to_csv(report.solves.front().schedule));
  }
  if (!paths.trajectory.empty() && report.trajectory) {
    write_text_file(paths.trajectory, trajectory_to_csv(*report.trajectory));
  }
}

void emit_plot_data(const RunReport& report, const OutputPaths& paths) {
  if (report.solves.empty()) return;
  const SolverReport& primary = report.solves.front();
  if (!paths.switching.empty()) write_text_file(paths.switching, switching_to_csv(primary.switching));
  if (!paths.eigenvalues.empty() && report.trajectory) {
    write_text_file(paths.eigenvalues, eigenvalues_to_csv(*report.trajectory));
  }
  if (!paths.objective_trace.empty()) {
    write_text_file(paths.objective_trace, objective_trace_to_csv(primary.objective_trace));
  }
}

}  // namespace sparsegram
