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
#include "sparsegram/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line_no) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::kConfigParse, "line " + std::to_string(line_no) +
                                             ": not a number: '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

std::string schedule_to_csv(const Schedule& sch) {
  std::ostringstream os;
  os << "t_start";
  for (int j = 0; j < sch.num_nodes(); ++j) os << ",v_" << j + 1;
  os << '\n';
  for (int k = 0; k < sch.intervals(); ++k) {
    os << num(sch.grid().start(k));
    for (int j = 0; j < sch.num_nodes(); ++j) os << ',' << num(sch(j, k));
    os << '\n';
  }
  return os.str();
}

Schedule schedule_from_csv(std::string_view text, const TimeGrid& grid) {
  std::vector<std::string_view> lines;
  for (std::string_view line : split(text, '\n')) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::kConfigParse, "schedule CSV is empty");
  const auto header = split(lines.front(), ',');
  if (header.size() < 2 || trim(header.front()) != "t_start") {
    throw Error(ErrorCode::kConfigParse, "line 1: expected header 't_start,v_1,...,v_p'");
  }
  const int p = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < p; ++j) {
    if (trim(header[j + 1]) != "v_" + std::to_string(j + 1)) {
      throw Error(ErrorCode::kConfigParse,
                  "line 1: column " + std::to_string(j + 2) + " should be v_" +
                      std::to_string(j + 1));
    }
  }
  const int steps = static_cast<int>(lines.size()) - 1;
  if (steps != grid.intervals()) {
    throw Error(ErrorCode::kGridMismatch, "schedule CSV has " + std::to_string(steps) +
                                              " rows, grid has " +
                                              std::to_string(grid.intervals()) + " intervals");
  }
  Matrix values(p, steps);
  for (int k = 0; k < steps; ++k) {
    const std::size_t line_no = k + 2;
    const auto fields = split(lines[k + 1], ',');
    if (static_cast<int>(fields.size()) != p + 1) {
      throw Error(ErrorCode::kConfigParse,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(p + 1) +
                      " fields");
    }
    const double t = parse_number(fields[0], line_no);
    if (std::abs(t - grid.start(k)) > 1e-9 * grid.horizon()) {
      throw Error(ErrorCode::kGridMismatch,
                  "line " + std::to_string(line_no) + ": t_start " + num(t) +
                      " does not match grid time " + num(grid.start(k)));
    }
    for (int j = 0; j < p; ++j) values(j, k) = parse_number(fields[j + 1], line_no);
  }
  return Schedule(std::move(values), grid);
}

std::string switching_to_csv(const SwitchingProfile& profile) {
  std::ostringstream os;
  const Eigen::Index p = profile.midpoint.rows();
  os << "t_mid";
  for (Eigen::Index j = 0; j < p; ++j) os << ",q_" << j + 1;
  os << '\n';
  for (int k = 0; k < profile.grid.intervals(); ++k) {
    os << num(profile.grid.midpoint(k));
    for (Eigen::Index j = 0; j < p; ++j) os << ',' << num(profile.midpoint(j, k));
    os << '\n';
  }
  return os.str();
}

std::string trajectory_to_csv(const GramianTrajectory& traj) {
  std::ostringstream os;
  const Eigen::Index n = traj.states.front().rows();
  os << 't';
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) os << ",G_" << r + 1 << c + 1;
  }
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = k + 1 == traj.states.size() ? traj.grid.horizon()
                                                 : traj.grid.start(static_cast<int>(k));
    os << num(t);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) os << ',' << num(traj.states[k](r, c));
    }
    os << '\n';
  }
  return os.str();
}

std::string eigenvalues_to_csv(const GramianTrajectory& traj) {
  std::ostringstream os;
  const Eigen::Index n = traj.states.front().rows();
  os << 't';
  for (Eigen::Index i = 0; i < n; ++i) os << ",lambda_" << i + 1;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const double t = k + 1 == traj.states.size() ? traj.grid.horizon()
                                                 : traj.grid.start(static_cast<int>(k));
    const Vector lambda =
        Eigen::SelfAdjointEigenSolver<Matrix>(traj.states[k], Eigen::EigenvaluesOnly)
            .eigenvalues();
    os << num(t);
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << num(lambda(i));
    os << '\n';
  }
  return os.str();
}

std::string objective_trace_to_csv(const std::vector<double>& trace) {
  std::ostringstream os;
  os << "iteration,objective\n";
  for (std::size_t i = 0; i < trace.size(); ++i) os << i << ',' << num(trace[i]) << '\n';
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace sparsegram
