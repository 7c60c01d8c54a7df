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
#ifndef SPARSEGRAM_CSV_HPP
#define SPARSEGRAM_CSV_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sparsegram/adjoint.hpp"
#include "sparsegram/gramian.hpp"
#include "sparsegram/model.hpp"

namespace sparsegram {

// Time-indexed exports. Numbers are written with 17 significant digits so a
// value read back is bit-identical.

/// Header `t_start,v_1,...,v_p`, one row per interval.
std::string schedule_to_csv(const Schedule& sch);
/// Parses the schedule layout and checks the t_start column against grid.
Schedule schedule_from_csv(std::string_view text, const TimeGrid& grid);

/// Header `t_mid,q_1,...,q_p`.
std::string switching_to_csv(const SwitchingProfile& profile);
/// Header `t,G_11,G_12,...,G_nn`, full matrix in row-major order.
std::string trajectory_to_csv(const GramianTrajectory& traj);
/// Header `t,lambda_1,...,lambda_n`, ascending eigenvalues of each G(t_k).
std::string eigenvalues_to_csv(const GramianTrajectory& traj);
/// Header `iteration,objective`.
std::string objective_trace_to_csv(const std::vector<double>& trace);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sparsegram

#endif  // SPARSEGRAM_CSV_HPP
