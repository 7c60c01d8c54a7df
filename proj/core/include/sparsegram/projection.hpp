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
#ifndef SPARSEGRAM_PROJECTION_HPP
#define SPARSEGRAM_PROJECTION_HPP

#include "sparsegram/model.hpp"

namespace sparsegram {

struct ProjectionOptions {
  double feasibility_tol = 1e-10;
  double change_tol = 1e-13;
  int max_iters = 20000;
};

struct ProjectionResult {
  Matrix values;
  int iterations = 0;
  bool converged = false;
};

/// Shift tau >= 0 such that sum_i clamp(y_i - tau, 0, 1) = min(cap, sum_i clamp(y_i, 0, 1)).
/// clamp(y - tau, 0, 1) is the Euclidean projection of y onto
/// {x in [0,1]^m : sum x <= cap}.
double capped_simplex_shift(const Eigen::Ref<const Vector>& y, double cap);

/// Euclidean projection of a p x N matrix onto the relaxed feasible set
///   { v in [0,1]^{p x N} : sum_k v_jk dt <= alpha_j, sum_j v_jk <= beta }
/// For fixed row multipliers the problem splits into closed-form column
/// projections, so only the p multipliers are iterated on, by projected
/// Newton ascent on the concave dual with exact line searches. Dykstra's
/// alternating scheme between the row-capped and the column-capped boxes is
/// the fallback when that iteration stalls.
ProjectionResult project_feasible(const Matrix& y, const Budgets& bud, double dt,
                                  const ProjectionOptions& opts = {});

}  // namespace sparsegram

#endif  // SPARSEGRAM_PROJECTION_HPP
