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
// Batch front end: solve / oracle / check over JSON instance configs.

#include <cstdlib>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sparsegram/csv.hpp"
#include "sparsegram/error.hpp"
#include "sparsegram/run.hpp"

namespace {

using sparsegram::Json;

struct CommonFlags {
  std::vector<std::string> overrides;
  long long seed = -1;
  int jobs = 1;
  bool quiet = false;
};

sparsegram::RunConfig load(const std::string& path, const CommonFlags& flags) {
  Json doc = sparsegram::parse_config_text(sparsegram::read_text_file(path), path);
  for (const std::string& assignment : flags.overrides) sparsegram::apply_override(doc, assignment);
  if (flags.seed >= 0) doc["solver"]["seed"] = flags.seed;
  return sparsegram::parse_config(doc);
}

std::string summarize(const std::string& path, const sparsegram::RunReport& rep) {
  std::string out = path + ":";
  for (const auto& s : rep.solves) {
    out += " " + std::string(sparsegram::to_string(s.method)) + " J=" +
           std::to_string(s.objective) + (s.converged ? "" : " (not converged)") +
           " discrete=" + std::to_string(s.discreteness_fraction) +
           " assumption=" + (s.assumption.pass ? "pass" : "FAIL");
  }
  if (rep.document.contains("equivalence")) {
    const Json& eq = rep.document["equivalence"];
    out += " oracle=" + std::to_string(eq["oracle_value"].get<double>()) +
           " gap=" + std::to_string(eq["relative_gap"].get<double>());
  }
  return out;
}

int solve_one(const std::string& path, const CommonFlags& flags, std::string& log) {
  try {
    const sparsegram::RunConfig cfg = load(path, flags);
    const sparsegram::RunReport rep = sparsegram::run(cfg);
    sparsegram::write_outputs(rep, cfg.outputs);
    sparsegram::emit_plot_data(rep, cfg.outputs);
    if (cfg.outputs.report.empty() && !flags.quiet) log += rep.document.dump(2) + "\n";
    if (!flags.quiet) log += summarize(path, rep) + "\n";
    return 0;
  } catch (const std::exception& e) {
    log += path + ": error: " + e.what() + "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse controllability-Gramian maximization"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--set", flags.overrides, "Override a config key, e.g. --set solver.max_iters=100");
    sub->add_option("--seed", flags.seed, "Solver initialization seed (0 = deterministic start)");
    sub->add_flag("--quiet", flags.quiet, "Suppress stdout output");
  };

  std::vector<std::string> solve_configs;
  CLI::App* solve = app.add_subcommand("solve", "Run the solvers and diagnostics on one or more configs");
  solve->add_option("config", solve_configs, "Instance config (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--jobs", flags.jobs, "Configs to run concurrently")->check(CLI::PositiveNumber);
  add_common(solve);

  std::string oracle_config;
  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force the binary problem");
  oracle->add_option("config", oracle_config, "Instance config (JSON)")->required()->check(CLI::ExistingFile);
  add_common(oracle);

  std::string check_config;
  std::string schedule_path;
  CLI::App* check = app.add_subcommand("check", "Assumption and PMP diagnostics for a schedule CSV");
  check->add_option("config", check_config, "Instance config (JSON)")->required()->check(CLI::ExistingFile);
  check->add_option("--schedule", schedule_path, "Schedule CSV (t_start,v_1,...,v_p)")
      ->required()
      ->check(CLI::ExistingFile);
  add_common(check);

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) {
    std::vector<std::string> logs(solve_configs.size());
    std::vector<int> status(solve_configs.size(), 0);
    const std::size_t width = static_cast<std::size_t>(flags.jobs);
    for (std::size_t begin = 0; begin < solve_configs.size(); begin += width) {
      const std::size_t end = std::min(solve_configs.size(), begin + width);
      std::vector<std::future<int>> pending;
      for (std::size_t i = begin; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, [&, i] {
          return solve_one(solve_configs[i], flags, logs[i]);
        }));
      }
      for (std::size_t i = begin; i < end; ++i) status[i] = pending[i - begin].get();
    }
    int rc = 0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      (status[i] ? std::cerr : std::cout) << logs[i];
      rc |= status[i];
    }
    return rc;
  }

  try {
    if (oracle->parsed()) {
      const sparsegram::RunConfig cfg = load(oracle_config, flags);
      const Json out = sparsegram::run_oracle(cfg);
      if (!cfg.outputs.report.empty()) sparsegram::write_text_file(cfg.outputs.report, out.dump(2) + "\n");
      if (!flags.quiet) std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (check->parsed()) {
      const sparsegram::RunConfig cfg = load(check_config, flags);
      const sparsegram::Schedule sch =
          sparsegram::schedule_from_csv(sparsegram::read_text_file(schedule_path), cfg.grid());
      const Json out = sparsegram::check_schedule(cfg, sch);
      if (!flags.quiet) std::cout << out.dump(2) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
