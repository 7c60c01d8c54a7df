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
#ifndef SPARSEGRAM_GRAMIAN_HPP
#define SPARSEGRAM_GRAMIAN_HPP

#include <vector>

#include "sparsegram/model.hpp"

namespace sparsegram {

/// e^M by scaling and squaring with a Pade approximant.
Matrix matrix_exponential(const Matrix& m);

/// Exact one-interval flow of G' = AG + GA^T + B diag(v) B^T:
/// G_{k+1} = transition * G_k * transition^T + injection.
struct StepUpdate {
  Matrix transition;  // e^{A dt}
  Matrix injection;   // int_0^dt e^{A s} B diag(v) B^T e^{A^T s} ds
};

StepUpdate step_update(const LtiSystem& sys, const Vector& v, double dt);

struct GramianTrajectory {
  std::vector<Matrix> states;  // N + 1 symmetric matrices, states[0] = 0
  TimeGrid grid;

  const Matrix& terminal() const { return states.back(); }
};

/// Integrates the Lyapunov differential equation over a piecewise-constant
/// schedule. Step updates are cached per distinct column of the schedule.
GramianTrajectory propagate(const LtiSystem& sys, const Schedule& sch);

/// Evaluates the Gramian integral directly as a sum of per-interval integrals
/// transported to T. Independent of propagate's recursion.
Matrix gramian_quadrature(const LtiSystem& sys, const Schedule& sch);

struct EnergyResult {
  double energy = 0.0;
  double condition = 0.0;  // lambda_max / lambda_min of G
};

/// Minimum control energy x_f^T G^{-1} x_f. Throws kSingularGramian when
/// lambda_min(G) <= 1e-12 lambda_max(G); the message names the hard-to-reach
/// direction.
EnergyResult min_energy(const Matrix& gramian, const Vector& target);

/// Precomputed per-(node, interval) contributions to G(T). Since the flow is
/// affine in the schedule,
///   G(T) = sum_{j,k} v_jk W_jk,  W_jk = Phi_k S_j Phi_k^T,
/// with Phi_k = e^{A (T - t_{k+1})} and S_j the one-interval injection of
/// node j alone. The same table gives the exact derivative of any metric of
/// G(T) with respect to v_jk.
class SensitivityBasis {
 public:
  SensitivityBasis(const LtiSystem& sys, const TimeGrid& grid);

  int num_nodes() const { return num_nodes_; }
  int intervals() const { return grid_.intervals(); }
  const TimeGrid& grid() const { return grid_; }
  const Matrix& contribution(int j, int k) const { return table_[index(j, k)]; }

  /// G(T) for the p x N value matrix v.
  Matrix terminal_gramian(const Matrix& v) const;

  /// dJ/dv_jk / dt = <gradK, W_jk> / dt, the interval average of the
  /// switching function of node j over interval k.
  Matrix interval_scores(const Matrix& grad) const;

 private:
  std::size_t index(int j, int k) const {
    return static_cast<std::size_t>(k) * num_nodes_ + j;
  }

  int num_nodes_;
  TimeGrid grid_;
  std::vector<Matrix> table_;
};

}  // namespace sparsegram

#endif  // SPARSEGRAM_GRAMIAN_HPP
