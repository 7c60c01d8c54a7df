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
#include "sparsegram/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "sparsegram/error.hpp"

namespace sparsegram {

SwitchingProfile switching_functions(const LtiSystem& sys, const Matrix& grad,
                                     const TimeGrid& grid) {
  return switching_functions(sys, SensitivityBasis(sys, grid), grad);
}

SwitchingProfile switching_functions(const LtiSystem& sys, const SensitivityBasis& basis,
                                     const Matrix& grad) {
  const int n = sys.state_dim();
  if (grad.rows() != n || grad.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient must be n x n");
  }
  const TimeGrid& grid = basis.grid();
  const int p = sys.num_nodes();
  const int steps = grid.intervals();

  SwitchingProfile out{Matrix(p, steps), basis.interval_scores(grad), grad, grid};

  // e^{A (T - t_mid)} for the last interval, then one full step per interval back.
  const Matrix step = matrix_exponential(sys.A * grid.step());
  Matrix carry = matrix_exponential(sys.A * (0.5 * grid.step()));
  for (int k = steps - 1; k >= 0; --k) {
    const Matrix reach = carry * sys.B;  // columns e^{A s} b_j
    const Matrix weighted = grad * reach;
    for (int j = 0; j < p; ++j) out.midpoint(j, k) = reach.col(j).dot(weighted.col(j));
    carry = carry * step;
  }
  return out;
}

AssumptionReport check_assumption(const SwitchingProfile& profile, double tol) {
  const Matrix& q = profile.midpoint;
  const int p = static_cast<int>(q.rows());
  AssumptionReport rep;
  rep.tolerance = tol;
  const double cutoff = tol * (1.0 + q.cwiseAbs().maxCoeff());

  rep.node_range.resize(p);
  rep.node_constant.resize(p);
  for (int j = 0; j < p; ++j) {
    rep.node_range(j) = q.row(j).maxCoeff() - q.row(j).minCoeff();
    rep.node_constant[j] = rep.node_range(j) <= cutoff;
  }
  rep.pair_range = Matrix::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const Eigen::RowVectorXd diff = q.row(i) - q.row(j);
      const double range = diff.maxCoeff() - diff.minCoeff();
      rep.pair_range(i, j) = rep.pair_range(j, i) = range;
      if (range <= cutoff) rep.constant_pairs.emplace_back(i, j);
    }
  }
  rep.pass = rep.constant_pairs.empty() &&
             std::none_of(rep.node_constant.begin(), rep.node_constant.end(),
                          [](bool b) { return b; });
  return rep;
}

double PmpResiduals::max_complementary_slackness() const {
  return complementary_slackness.size() ? complementary_slackness.maxCoeff() : 0.0;
}

double PmpResiduals::worst() const {
  return std::max({adjoint, transversality, maximum_condition_gap,
                   max_complementary_slackness()});
}

double column_hamiltonian_max(const Eigen::Ref<const Vector>& adjusted, int beta) {
  std::vector<double> positive;
  for (Eigen::Index j = 0; j < adjusted.size(); ++j) {
    if (adjusted(j) > 0.0) positive.push_back(adjusted(j));
  }
  const auto take = std::min<std::size_t>(positive.size(), static_cast<std::size_t>(beta));
  std::partial_sort(positive.begin(), positive.begin() + take, positive.end(),
                    std::greater<>());
  double best = 0.0;
  for (std::size_t i = 0; i < take; ++i) best += positive[i];
  return best;
}

PmpResiduals verify_pmp(const LtiSystem& sys, const MetricSpec& metric, const Budgets& bud,
                        const Schedule& sch, const Vector& thresholds) {
  const int p = sys.num_nodes();
  if (thresholds.size() != p || bud.alpha.size() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "thresholds and budgets need p entries");
  }
  const TimeGrid& grid = sch.grid();
  const GramianTrajectory traj = propagate(sys, sch);
  const MetricGradient grad = gradient(metric, traj.terminal());

  PmpResiduals res;
  res.objective = evaluate(metric, traj.terminal());

  // Adjoint: P(t) = e^{A^T (T-t)} gradK e^{A (T-t)} in closed form versus the
  // exact backward flow P_k = E^T P_{k+1} E of -P' = A^T P + P A.
  const Matrix e = matrix_exponential(sys.A * grid.step());
  Matrix backward = grad.value;
  for (int k = grid.intervals(); k >= 0; --k) {
    const Matrix carry = matrix_exponential(sys.A * (grid.horizon() - grid.start(k)));
    const Matrix closed = carry.transpose() * grad.value * carry;
    const double defect = (closed - backward).norm() / (1.0 + closed.norm());
    res.adjoint = std::max(res.adjoint, defect);
    if (k == grid.intervals()) {
      res.transversality = (closed - grad.value).norm();
    }
    backward = e.transpose() * backward * e;
  }
  for (int j = 0; j < p; ++j) {
    res.transversality = std::max(res.transversality, std::max(0.0, -thresholds(j)));
  }

  // Maximum condition over Omega = {v in [0,1]^p : sum v <= beta}.
  const SwitchingProfile profile = switching_functions(sys, grad.value, grid);
  const Matrix adjusted = profile.interval_average.colwise() - thresholds;
  for (int k = 0; k < grid.intervals(); ++k) {
    const double best = column_hamiltonian_max(adjusted.col(k), bud.beta);
    const double attained = adjusted.col(k).dot(sch.values().col(k));
    res.maximum_condition_gap = std::max(res.maximum_condition_gap, best - attained);
  }

  const Vector used = sch.values().rowwise().sum() * grid.step();
  res.complementary_slackness = (thresholds.array() * (bud.alpha - used).array()).abs();
  return res;
}

}  // namespace sparsegram
