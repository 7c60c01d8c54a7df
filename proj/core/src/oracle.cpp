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
#include "sparsegram/oracle.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "sparsegram/error.hpp"
#include "sparsegram/gramian.hpp"

namespace sparsegram {

namespace {

constexpr double kMaximizerTol = 1e-12;

void require_small(const Budgets& bud, const TimeGrid& grid, int num_nodes) {
  if (num_nodes < 1) throw Error(ErrorCode::kDimensionMismatch, "oracle needs p >= 1");
  if (bud.alpha.size() != num_nodes) {
    throw Error(ErrorCode::kDimensionMismatch, "alpha length differs from p");
  }
  const long cells = static_cast<long>(num_nodes) * grid.intervals();
  if (cells > kMaxOracleCells) {
    throw Error(ErrorCode::kInstanceTooLarge,
                "p*N = " + std::to_string(cells) + " exceeds the enumeration cap of " +
                    std::to_string(kMaxOracleCells));
  }
}

// Depth-first walk over intervals. `on_column` is told about each column
// choice before descending so callers can maintain per-prefix state.
class Walker {
 public:
  Walker(const Budgets& bud, const TimeGrid& grid, int num_nodes)
      : num_nodes_(num_nodes), steps_(grid.intervals()), beta_(bud.beta),
        caps_(num_nodes), used_(num_nodes, 0), masks_(grid.intervals(), 0) {
    for (int j = 0; j < num_nodes; ++j) caps_[j] = bud.max_active_intervals(j, grid.step());
    for (unsigned m = 0; m < (1u << num_nodes); ++m) {
      if (std::popcount(m) <= beta_) columns_.push_back(m);
    }
  }

  template <typename OnColumn, typename OnLeaf>
  std::int64_t run(OnColumn&& on_column, OnLeaf&& on_leaf) {
    return descend(0, on_column, on_leaf);
  }

  const std::vector<unsigned>& masks() const { return masks_; }

  Matrix current() const {
    Matrix v = Matrix::Zero(num_nodes_, steps_);
    for (int k = 0; k < steps_; ++k) {
      for (int j = 0; j < num_nodes_; ++j) v(j, k) = (masks_[k] >> j) & 1u;
    }
    return v;
  }

 private:
  template <typename OnColumn, typename OnLeaf>
  std::int64_t descend(int k, OnColumn& on_column, OnLeaf& on_leaf) {
    if (k == steps_) {
      on_leaf();
      return 1;
    }
    std::int64_t count = 0;
    for (unsigned m : columns_) {
      bool fits = true;
      for (int j = 0; j < num_nodes_ && fits; ++j) {
        if (((m >> j) & 1u) && used_[j] >= caps_[j]) fits = false;
      }
      if (!fits) continue;
      for (int j = 0; j < num_nodes_; ++j) used_[j] += (m >> j) & 1u;
      masks_[k] = m;
      on_column(k, m);
      count += descend(k + 1, on_column, on_leaf);
      for (int j = 0; j < num_nodes_; ++j) used_[j] -= (m >> j) & 1u;
    }
    return count;
  }

  int num_nodes_;
  int steps_;
  int beta_;
  std::vector<int> caps_;
  std::vector<int> used_;
  std::vector<unsigned> masks_;
  std::vector<unsigned> columns_;
};

}  // namespace

std::int64_t enumerate_feasible(const Budgets& bud, const TimeGrid& grid, int num_nodes,
                                const std::function<void(const Matrix&)>& visit) {
  require_small(bud, grid, num_nodes);
  Walker walker(bud, grid, num_nodes);
  return walker.run([](int, unsigned) {}, [&] {
    if (visit) visit(walker.current());
  });
}

std::int64_t count_feasible(const Budgets& bud, const TimeGrid& grid, int num_nodes) {
  return enumerate_feasible(bud, grid, num_nodes, nullptr);
}

OracleResult brute_force_binary(const LtiSystem& sys, const MetricSpec& metric,
                                const Budgets& bud, const TimeGrid& grid,
                                std::size_t max_listed) {
  validate_system(sys);
  validate_metric(metric);
  const int p = sys.num_nodes();
  require_small(bud, grid, p);
  validate_budgets(bud, p, sys.horizon);
  if (!grid.matches(TimeGrid(sys.horizon, grid.intervals()))) {
    throw Error(ErrorCode::kGridMismatch, "grid horizon differs from the system horizon");
  }

  const int n = sys.state_dim();
  std::vector<StepUpdate> updates;
  updates.reserve(1u << p);
  for (unsigned m = 0; m < (1u << p); ++m) {
    Vector v(p);
    for (int j = 0; j < p; ++j) v(j) = (m >> j) & 1u;
    updates.push_back(step_update(sys, v, grid.step()));
  }

  // prefix[k] = G(t_k) for the current column choices.
  std::vector<Matrix> prefix(grid.intervals() + 1, Matrix::Zero(n, n));
  struct Candidate {
    double value;
    Matrix values;
  };
  std::vector<Candidate> candidates;
  double best = -std::numeric_limits<double>::infinity();

  Walker walker(bud, grid, p);
  OracleResult out;
  out.num_feasible = walker.run(
      [&](int k, unsigned m) {
        const StepUpdate& up = updates[m];
        Matrix next = up.transition * prefix[k] * up.transition.transpose() + up.injection;
        prefix[k + 1] = 0.5 * (next + next.transpose());
      },
      [&] {
        const double value = evaluate(metric, prefix.back());
        if (value > best + kMaximizerTol) {
          best = value;
          std::erase_if(candidates,
                        [&](const Candidate& c) { return c.value < best - kMaximizerTol; });
        } else if (value < best - kMaximizerTol) {
          return;
        }
        best = std::max(best, value);
        if (candidates.size() < max_listed) {
          candidates.push_back({value, walker.current()});
        } else {
          out.maximizers_truncated = true;
        }
      });

  out.best_value = best;
  out.num_enumerated = std::int64_t{1} << (p * grid.intervals());
  for (auto& c : candidates) {
    if (c.value >= best - kMaximizerTol) out.best_schedules.emplace_back(std::move(c.values), grid);
  }
  return out;
}

}  // namespace sparsegram
