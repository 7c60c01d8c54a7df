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
#ifndef SPARSEGRAM_ORACLE_HPP
#define SPARSEGRAM_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "sparsegram/metrics.hpp"
#include "sparsegram/model.hpp"

namespace sparsegram {

/// Enumeration refuses instances with more than this many p*N cells.
inline constexpr int kMaxOracleCells = 24;

/// Binary p x N schedules with at most floor(alpha_j/dt + 1e-12) active
/// intervals per node and at most beta active nodes per interval, visited in
/// column-major lexicographic order (interval 0 varies slowest; within an
/// interval, node j is bit j of an increasing mask). Returns the count.
std::int64_t enumerate_feasible(const Budgets& bud, const TimeGrid& grid, int num_nodes,
                                const std::function<void(const Matrix&)>& visit);

std::int64_t count_feasible(const Budgets& bud, const TimeGrid& grid, int num_nodes);

struct OracleResult {
  double best_value = 0.0;
  std::vector<Schedule> best_schedules;  // every maximizer within 1e-12, in enumeration order
  std::int64_t num_feasible = 0;
  std::int64_t num_enumerated = 0;  // size of the unconstrained space, 2^{pN}
  bool maximizers_truncated = false;
};

/// Exhaustive maximization of K(G(T)) over binary feasible schedules. At most
/// max_listed maximizers are kept; maximizers_truncated reports overflow.
OracleResult brute_force_binary(const LtiSystem& sys, const MetricSpec& metric,
                                const Budgets& bud, const TimeGrid& grid,
                                std::size_t max_listed = 4096);

}  // namespace sparsegram

#endif  // SPARSEGRAM_ORACLE_HPP
