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
#include "sparsegram/gramian.hpp"

#include <map>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

void symmetrize(Matrix& g) { g = 0.5 * (g + g.transpose()).eval(); }

void require_grid(const LtiSystem& sys, const Schedule& sch) {
  if (sch.num_nodes() != sys.num_nodes()) {
    throw Error(ErrorCode::kGridMismatch,
                "schedule has " + std::to_string(sch.num_nodes()) + " nodes, system has " +
                    std::to_string(sys.num_nodes()));
  }
  if (!sch.grid().matches(TimeGrid(sys.horizon, sch.grid().intervals()))) {
    throw Error(ErrorCode::kGridMismatch, "schedule grid does not span the system horizon");
  }
}

// Van Loan: exp([[-A, Q], [0, A^T]] dt) = [[., F12], [0, F22]] and
// int_0^dt e^{As} Q e^{A^T s} ds = F22^T F12.
Matrix interval_integral(const Matrix& a, const Matrix& q, double dt) {
  const Eigen::Index n = a.rows();
  Matrix block = Matrix::Zero(2 * n, 2 * n);
  block.topLeftCorner(n, n) = -a * dt;
  block.topRightCorner(n, n) = q * dt;
  block.bottomRightCorner(n, n) = a.transpose() * dt;
  const Matrix f = matrix_exponential(block);
  Matrix s = f.bottomRightCorner(n, n).transpose() * f.topRightCorner(n, n);
  symmetrize(s);
  return s;
}

}  // namespace

Matrix matrix_exponential(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix exponential needs a square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNonfiniteEntry, "matrix exponential of a nonfinite matrix");
  }
  if (m.size() == 0) return m;
  return m.exp();
}

StepUpdate step_update(const LtiSystem& sys, const Vector& v, double dt) {
  if (v.size() != sys.num_nodes()) {
    throw Error(ErrorCode::kDimensionMismatch, "activation vector length differs from p");
  }
  const Matrix q = sys.B * v.asDiagonal() * sys.B.transpose();
  return StepUpdate{matrix_exponential(sys.A * dt), interval_integral(sys.A, q, dt)};
}

GramianTrajectory propagate(const LtiSystem& sys, const Schedule& sch) {
  require_grid(sys, sch);
  const TimeGrid& grid = sch.grid();
  const int n = sys.state_dim();
  const double dt = grid.step();

  std::map<std::vector<double>, StepUpdate> cache;
  GramianTrajectory traj{{}, grid};
  traj.states.reserve(grid.intervals() + 1);
  traj.states.push_back(Matrix::Zero(n, n));
  for (int k = 0; k < grid.intervals(); ++k) {
    const Vector col = sch.values().col(k);
    std::vector<double> key(col.data(), col.data() + col.size());
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(std::move(key), step_update(sys, col, dt)).first;
    const StepUpdate& up = it->second;
    Matrix next = up.transition * traj.states.back() * up.transition.transpose() + up.injection;
    symmetrize(next);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Matrix gramian_quadrature(const LtiSystem& sys, const Schedule& sch) {
  require_grid(sys, sch);
  const TimeGrid& grid = sch.grid();
  const int n = sys.state_dim();
  Matrix g = Matrix::Zero(n, n);
  for (int k = 0; k < grid.intervals(); ++k) {
    const Vector col = sch.values().col(k);
    if (col.isZero(0.0)) continue;
    const Matrix q = sys.B * col.asDiagonal() * sys.B.transpose();
    const Matrix local = interval_integral(sys.A, q, grid.step());
    const Matrix carry = matrix_exponential(sys.A * (grid.horizon() - grid.end(k)));
    g += carry * local * carry.transpose();
  }
  symmetrize(g);
  return g;
}

EnergyResult min_energy(const Matrix& gramian, const Vector& target) {
  if (gramian.rows() != gramian.cols() || gramian.rows() != target.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gramian and target dimensions differ");
  }
  const double scale = gramian.norm();
  if ((gramian - gramian.transpose()).norm() > 1e-10 * scale) {
    throw Error(ErrorCode::kAsymmetricMatrix, "gramian is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gramian);
  const Vector& lambda = eig.eigenvalues();
  const double lmin = lambda(0);
  const double lmax = lambda(lambda.size() - 1);
  if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
    std::ostringstream os;
    os << "lambda_min = " << lmin << ", lambda_max = " << lmax
       << "; hard-to-reach direction [" << eig.eigenvectors().col(0).transpose() << "]";
    throw Error(ErrorCode::kSingularGramian, os.str());
  }
  const Vector y = gramian.ldlt().solve(target);
  return EnergyResult{target.dot(y), lmax / lmin};
}

SensitivityBasis::SensitivityBasis(const LtiSystem& sys, const TimeGrid& grid)
    : num_nodes_(sys.num_nodes()), grid_(grid) {
  validate_system(sys);
  if (!grid.matches(TimeGrid(sys.horizon, grid.intervals()))) {
    throw Error(ErrorCode::kGridMismatch, "basis grid does not span the system horizon");
  }
  const int n = sys.state_dim();
  const int steps = grid.intervals();
  const double dt = grid.step();

  std::vector<Matrix> unit(num_nodes_);
  for (int j = 0; j < num_nodes_; ++j) {
    const Vector b = sys.node(j);
    unit[j] = interval_integral(sys.A, b * b.transpose(), dt);
  }

  table_.resize(static_cast<std::size_t>(num_nodes_) * steps);
  const Matrix e = matrix_exponential(sys.A * dt);
  Matrix carry = Matrix::Identity(n, n);  // Phi_k, built backwards from k = N-1
  for (int k = steps - 1; k >= 0; --k) {
    for (int j = 0; j < num_nodes_; ++j) {
      Matrix w = carry * unit[j] * carry.transpose();
      symmetrize(w);
      table_[index(j, k)] = std::move(w);
    }
    carry = carry * e;
  }
}

Matrix SensitivityBasis::terminal_gramian(const Matrix& v) const {
  if (v.rows() != num_nodes_ || v.cols() != grid_.intervals()) {
    throw Error(ErrorCode::kGridMismatch, "value matrix does not match the basis");
  }
  const Eigen::Index n = table_.front().rows();
  Matrix g = Matrix::Zero(n, n);
  for (int k = 0; k < grid_.intervals(); ++k) {
    for (int j = 0; j < num_nodes_; ++j) {
      if (v(j, k) != 0.0) g.noalias() += v(j, k) * table_[index(j, k)];
    }
  }
  return g;
}

Matrix SensitivityBasis::interval_scores(const Matrix& grad) const {
  Matrix s(num_nodes_, grid_.intervals());
  const double inv_dt = 1.0 / grid_.step();
  for (int k = 0; k < grid_.intervals(); ++k) {
    for (int j = 0; j < num_nodes_; ++j) {
      s(j, k) = grad.cwiseProduct(table_[index(j, k)]).sum() * inv_dt;
    }
  }
  return s;
}

}  // namespace sparsegram
