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
#ifndef SPARSEGRAM_MODEL_HPP
#define SPARSEGRAM_MODEL_HPP

#include <Eigen/Dense>
#include <vector>

namespace sparsegram {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Default absolute tolerance for budget checks; budgets enter through sums
/// of O(N) terms.
inline constexpr double kFeasibilityTol = 1e-9;

/// Linear network x' = A x + B V(t) u with horizon T. Column j of B is the
/// input direction of node j.
struct LtiSystem {
  Matrix A;
  Matrix B;
  double horizon = 1.0;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int num_nodes() const { return static_cast<int>(B.cols()); }
  Vector node(int j) const { return B.col(j); }
};

/// Throws Error on a malformed system: dimension mismatch (naming the field),
/// nonfinite entries, or T <= 0.
void validate_system(const LtiSystem& sys);

/// Uniform partition of [0, T] into N intervals.
class TimeGrid {
 public:
  TimeGrid() : TimeGrid(1.0, 1) {}
  TimeGrid(double horizon, int intervals);

  int intervals() const { return intervals_; }
  double horizon() const { return horizon_; }
  double step() const { return step_; }

  double start(int k) const { return k * step_; }
  double end(int k) const { return k + 1 == intervals_ ? horizon_ : (k + 1) * step_; }
  double midpoint(int k) const { return (k + 0.5) * step_; }

  /// True when both grids describe the same partition.
  bool matches(const TimeGrid& other) const;

 private:
  double horizon_;
  int intervals_;
  double step_;
};

/// Per-node activation-time budgets alpha_j and the simultaneity cap beta.
struct Budgets {
  Vector alpha;
  int beta = 1;

  /// Maximum number of active intervals allowed for node j on a grid with
  /// step dt, i.e. floor(alpha_j / dt + 1e-12).
  int max_active_intervals(int j, double dt) const;
};

/// Rejects a non-integral beta instead of flooring it.
int checked_beta(double beta);

/// Throws Error(kInvalidBudget) unless 0 < alpha_j <= T and 1 <= beta <= p.
void validate_budgets(const Budgets& bud, int num_nodes, double horizon);

/// Piecewise-constant activation v_j(t) = values(j, k) on interval k.
class Schedule {
 public:
  Schedule() : Schedule(Matrix::Zero(1, 1), TimeGrid()) {}
  /// values must be p x N with entries in [0, 1].
  Schedule(Matrix values, TimeGrid grid);

  static Schedule zeros(int num_nodes, const TimeGrid& grid);
  static Schedule constant(int num_nodes, const TimeGrid& grid, double value);

  const Matrix& values() const { return values_; }
  const TimeGrid& grid() const { return grid_; }
  int num_nodes() const { return static_cast<int>(values_.rows()); }
  int intervals() const { return static_cast<int>(values_.cols()); }
  double operator()(int j, int k) const { return values_(j, k); }

  bool is_binary() const;

 private:
  Matrix values_;
  TimeGrid grid_;
};

enum class NormMode { kL0l0, kL1l1 };

struct FeasibilityReport {
  std::vector<bool> row_ok;  // per node: sum_k v_jk dt <= alpha_j + tol
  std::vector<bool> col_ok;  // per interval: sum_j v_jk <= beta + tol
  bool box_ok = true;
  double worst_violation = 0.0;

  bool ok() const;
};

/// For binary schedules the L0/l0 norms coincide with the L1/l1 sums, so
/// both modes share the same arithmetic; L0/l0 additionally requires a
/// binary schedule.
FeasibilityReport check_feasibility(const Schedule& sch, const Budgets& bud,
                                    NormMode mode, double tol = kFeasibilityTol);

struct ScheduleNorms {
  Vector row_l1;  // per node, time-weighted
  Vector col_l1;  // per interval
  double binary_fraction = 0.0;
};

ScheduleNorms norms(const Schedule& sch);

}  // namespace sparsegram

#endif  // SPARSEGRAM_MODEL_HPP
