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
#ifndef SPARSEGRAM_ADJOINT_HPP
#define SPARSEGRAM_ADJOINT_HPP

#include <utility>
#include <vector>

#include "sparsegram/gramian.hpp"
#include "sparsegram/metrics.hpp"
#include "sparsegram/model.hpp"

namespace sparsegram {

/// Switching functions q_j(t) = b_j^T e^{A^T (T-t)} gradK e^{A (T-t)} b_j
/// sampled on a grid.
struct SwitchingProfile {
  Matrix midpoint;          // p x N, q_j at the midpoint of interval k
  Matrix interval_average;  // p x N, (1/dt) * integral of q_j over interval k
  Matrix gradient;          // the gradK the profile was built from
  TimeGrid grid;
};

SwitchingProfile switching_functions(const LtiSystem& sys, const Matrix& grad,
                                     const TimeGrid& grid);
SwitchingProfile switching_functions(const LtiSystem& sys, const SensitivityBasis& basis,
                                     const Matrix& grad);

inline constexpr double kAssumptionTol = 1e-9;

/// Outcome of the non-constancy test on q_j and q_i - q_j over the grid.
struct AssumptionReport {
  Vector node_range;                           // max_k q_j - min_k q_j
  Matrix pair_range;                           // range of q_i - q_j (symmetric, zero diagonal)
  std::vector<bool> node_constant;
  std::vector<std::pair<int, int>> constant_pairs;  // i < j
  double tolerance = kAssumptionTol;
  bool pass = false;
};

/// A node (or pair) is flagged constant when its range is at most
/// tol * (1 + max |q|).
AssumptionReport check_assumption(const SwitchingProfile& profile, double tol = kAssumptionTol);

/// First-order optimality residuals of a candidate schedule with normal
/// multiplier eta = 1 and budget multipliers theta_j = -P22_jj(T).
struct PmpResiduals {
  double adjoint = 0.0;                // closed-form adjoint vs exact backward flow, relative
  double transversality = 0.0;         // |P11(T) - dK/dG| plus any negative theta_j
  double maximum_condition_gap = 0.0;  // max_k shortfall of the Hamiltonian vs its max over Omega
  Vector complementary_slackness;      // |theta_j (alpha_j - ||v_j||_L1)|
  double objective = 0.0;

  double max_complementary_slackness() const;
  double worst() const;
};

/// Diagnostics only; never throws on a poor candidate. Scores used by the
/// maximum condition are the interval averages of q_j, which are the exact
/// first-order sensitivities of the gridded problem.
PmpResiduals verify_pmp(const LtiSystem& sys, const MetricSpec& metric, const Budgets& bud,
                        const Schedule& sch, const Vector& thresholds);

/// Sum of the beta largest positive entries of one column of adjusted scores.
double column_hamiltonian_max(const Eigen::Ref<const Vector>& adjusted, int beta);

}  // namespace sparsegram

#endif  // SPARSEGRAM_ADJOINT_HPP
