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
#ifndef SPARSEGRAM_SOLVER_HPP
#define SPARSEGRAM_SOLVER_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sparsegram/adjoint.hpp"
#include "sparsegram/gramian.hpp"
#include "sparsegram/metrics.hpp"
#include "sparsegram/model.hpp"

namespace sparsegram {

enum class SolverMethod { kProjectedGradient, kFixedPoint };

std::string_view to_string(SolverMethod method);
SolverMethod parse_solver_method(std::string_view name);

struct SolverOptions {
  SolverMethod method = SolverMethod::kProjectedGradient;
  int max_iters = 500;
  double step_size = 1.0;  // initial step along the max-normalized gradient
  bool adaptive_step = true;
  double damping = 0.5;  // fixed point: weight of the score history
  double convergence_tol = 1e-9;
  double threshold_bisection_tol = 1e-10;
  std::uint64_t seed = 0;  // 0 keeps the deterministic initializations
  double assumption_tol = kAssumptionTol;
  double discreteness_tol = 1e-3;
};

void validate_options(const SolverOptions& opts);

struct SolverReport {
  SolverMethod method = SolverMethod::kProjectedGradient;
  double objective = 0.0;
  Schedule schedule;
  Vector thresholds;  // theta_j >= 0
  double discreteness_fraction = 0.0;
  AssumptionReport assumption;
  PmpResiduals pmp;
  SwitchingProfile switching;
  int iterations = 0;
  std::vector<double> objective_trace;
  bool converged = false;
  int ties = 0;                       // near-ties resolved by the lower-index rule
  bool multiplicity_warning = false;  // min_eig subgradient at a repeated eigenvalue
};

/// Result of resolving the budget multipliers for fixed interval scores.
struct ThresholdFit {
  Vector thresholds;
  Matrix selection;  // binary p x N
  int ties = 0;
  int sweeps = 0;
};

/// Per interval, activates the (at most beta) nodes with the largest positive
/// adjusted score scores(j, k) - theta_j. Adjusted scores within 1e-12 of
/// each other are ordered by node index.
Matrix select_nodes(const Matrix& scores, const Vector& thresholds, int beta, int* ties = nullptr);

/// Solves the per-interval top-beta selection jointly with the node budgets
/// for fixed scores. The selection maximizes sum s_jk v_jk over the budgeted
/// binary schedules (exactly, as a min-cost flow), and theta_j are the
/// matching budget multipliers: theta_j >= 0, theta_j = 0 for slack budgets,
/// and at these thresholds the selection satisfies the top-beta rule on the
/// adjusted scores s_jk - theta_j. Among multipliers with these properties the
/// smallest are returned; those below tol * max|s| are zeroed.
ThresholdFit fit_thresholds(const Matrix& scores, const Budgets& bud, double dt,
                            double tol = 1e-10);

SolverReport solve_projected_gradient(const LtiSystem& sys, const MetricSpec& metric,
                                      const Budgets& bud, const TimeGrid& grid,
                                      const SolverOptions& opts = {});

SolverReport solve_fixed_point(const LtiSystem& sys, const MetricSpec& metric,
                               const Budgets& bud, const TimeGrid& grid,
                               const SolverOptions& opts = {});

/// Dispatches on opts.method.
SolverReport solve(const LtiSystem& sys, const MetricSpec& metric, const Budgets& bud,
                   const TimeGrid& grid, const SolverOptions& opts = {});

/// Fraction of entries within tol of {0, 1}.
double discreteness_report(const Schedule& sch, double tol);

/// Rounds at 0.5, then deactivates the weakest active entries of any row or
/// column that exceeds its budget. Entries are ranked by interval-averaged
/// switching score when a profile is given, else by their fractional value.
/// Throws kInfeasibleInput when the input violates the relaxed constraints
/// by more than 1e-6.
Schedule round_and_repair(const Schedule& sch, const Budgets& bud,
                          const SwitchingProfile* profile = nullptr);

}  // namespace sparsegram

#endif  // SPARSEGRAM_SOLVER_HPP
