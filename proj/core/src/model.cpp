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
#include "sparsegram/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

std::string shape(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

}  // namespace

void validate_system(const LtiSystem& sys) {
  if (sys.A.rows() < 1 || sys.A.rows() != sys.A.cols()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "A must be square with n >= 1, got " + shape(sys.A));
  }
  if (sys.B.cols() < 1 || sys.B.rows() != sys.A.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "B must be n x p with n = " + std::to_string(sys.A.rows()) +
                    " and p >= 1, got " + shape(sys.B));
  }
  if (!sys.A.allFinite()) {
    throw Error(ErrorCode::kNonfiniteEntry, "A has a nonfinite entry");
  }
  if (!sys.B.allFinite()) {
    throw Error(ErrorCode::kNonfiniteEntry, "B has a nonfinite entry");
  }
  if (!std::isfinite(sys.horizon)) {
    throw Error(ErrorCode::kNonfiniteEntry, "T is not finite");
  }
  if (sys.horizon <= 0.0) {
    throw Error(ErrorCode::kNonpositiveHorizon,
                "T must be positive, got " + std::to_string(sys.horizon));
  }
}

TimeGrid::TimeGrid(double horizon, int intervals)
    : horizon_(horizon), intervals_(intervals), step_(0.0) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorCode::kNonpositiveHorizon, "grid horizon must be positive and finite");
  }
  if (intervals < 1) {
    throw Error(ErrorCode::kGridMismatch, "grid needs N >= 1 intervals");
  }
  step_ = horizon / intervals;
}

bool TimeGrid::matches(const TimeGrid& other) const {
  return intervals_ == other.intervals_ &&
         std::abs(horizon_ - other.horizon_) <=
             4.0 * std::numeric_limits<double>::epsilon() * horizon_;
}

int Budgets::max_active_intervals(int j, double dt) const {
  return static_cast<int>(std::floor(alpha(j) / dt + 1e-12));
}

int checked_beta(double beta) {
  if (!std::isfinite(beta) || beta != std::floor(beta)) {
    throw Error(ErrorCode::kInvalidBudget,
                "beta must be an integer, got " + std::to_string(beta));
  }
  if (beta < 1.0) {
    throw Error(ErrorCode::kInvalidBudget, "beta must be at least 1");
  }
  return static_cast<int>(beta);
}

void validate_budgets(const Budgets& bud, int num_nodes, double horizon) {
  if (bud.alpha.size() != num_nodes) {
    throw Error(ErrorCode::kDimensionMismatch,
                "alpha has " + std::to_string(bud.alpha.size()) + " entries, expected " +
                    std::to_string(num_nodes));
  }
  for (int j = 0; j < num_nodes; ++j) {
    const double a = bud.alpha(j);
    if (!std::isfinite(a) || a <= 0.0 || a > horizon) {
      throw Error(ErrorCode::kInvalidBudget,
                  "alpha[" + std::to_string(j) + "] = " + std::to_string(a) +
                      " must lie in (0, T]");
    }
  }
  if (bud.beta < 1 || bud.beta > num_nodes) {
    throw Error(ErrorCode::kInvalidBudget,
                "beta = " + std::to_string(bud.beta) + " must lie in [1, p]");
  }
}

Schedule::Schedule(Matrix values, TimeGrid grid) : values_(std::move(values)), grid_(grid) {
  if (values_.rows() < 1 || values_.cols() != grid_.intervals()) {
    throw Error(ErrorCode::kGridMismatch,
                "schedule is " + shape(values_) + " but the grid has " +
                    std::to_string(grid_.intervals()) + " intervals");
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::kNonfiniteEntry, "schedule has a nonfinite entry");
  }
  if (values_.minCoeff() < 0.0 || values_.maxCoeff() > 1.0) {
    throw Error(ErrorCode::kInvalidSchedule, "schedule entries must lie in [0, 1]");
  }
}

Schedule Schedule::zeros(int num_nodes, const TimeGrid& grid) {
  return constant(num_nodes, grid, 0.0);
}

Schedule Schedule::constant(int num_nodes, const TimeGrid& grid, double value) {
  return Schedule(Matrix::Constant(num_nodes, grid.intervals(), value), grid);
}

bool Schedule::is_binary() const {
  return (values_.array() == 0.0 || values_.array() == 1.0).all();
}

bool FeasibilityReport::ok() const {
  return box_ok && std::all_of(row_ok.begin(), row_ok.end(), [](bool b) { return b; }) &&
         std::all_of(col_ok.begin(), col_ok.end(), [](bool b) { return b; });
}

FeasibilityReport check_feasibility(const Schedule& sch, const Budgets& bud, NormMode mode,
                                    double tol) {
  if (bud.alpha.size() != sch.num_nodes()) {
    throw Error(ErrorCode::kDimensionMismatch, "budgets and schedule disagree on p");
  }
  if (mode == NormMode::kL0l0 && !sch.is_binary()) {
    throw Error(ErrorCode::kModeMismatch, "L0/l0 mode requires a binary schedule");
  }
  const ScheduleNorms n = norms(sch);
  FeasibilityReport rep;
  double worst = 0.0;

  const Matrix& v = sch.values();
  const double box_excess = std::max({0.0, -v.minCoeff(), v.maxCoeff() - 1.0});
  rep.box_ok = box_excess <= tol;
  worst = std::max(worst, box_excess);

  rep.row_ok.resize(sch.num_nodes());
  for (int j = 0; j < sch.num_nodes(); ++j) {
    const double excess = n.row_l1(j) - bud.alpha(j);
    rep.row_ok[j] = excess <= tol;
    worst = std::max(worst, excess);
  }
  rep.col_ok.resize(sch.intervals());
  for (int k = 0; k < sch.intervals(); ++k) {
    const double excess = n.col_l1(k) - bud.beta;
    rep.col_ok[k] = excess <= tol;
    worst = std::max(worst, excess);
  }
  rep.worst_violation = worst;
  return rep;
}

ScheduleNorms norms(const Schedule& sch) {
  ScheduleNorms n;
  const Matrix& v = sch.values();
  n.row_l1 = v.rowwise().sum() * sch.grid().step();
  n.col_l1 = v.colwise().sum().transpose();
  const auto on_vertex = (v.array() == 0.0 || v.array() == 1.0).cast<double>();
  n.binary_fraction = on_vertex.sum() / static_cast<double>(v.size());
  return n;
}

}  // namespace sparsegram
