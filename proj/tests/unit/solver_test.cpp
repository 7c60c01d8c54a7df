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
#include "sparsegram/solver.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "sparsegram/error.hpp"
#include "sparsegram/oracle.hpp"
#include "testing.hpp"

namespace sparsegram {
namespace {

using testing::error_code_of;

MetricSpec spec(MetricKind kind) {
  MetricSpec m;
  m.kind = kind;
  return m;
}

SolverOptions method(SolverMethod m) {
  SolverOptions o;
  o.method = m;
  return o;
}

constexpr SolverMethod kBothMethods[] = {SolverMethod::kProjectedGradient,
                                         SolverMethod::kFixedPoint};

double rel_gap(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

struct Instance {
  LtiSystem sys;
  Budgets bud;
  TimeGrid grid;
};

// Oracle-sized instance whose budgets are whole numbers of intervals.
Instance random_instance(testing::Rng& rng, int max_cells = 12) {
  const int n = testing::uniform_int(rng, 1, 3);
  const int p = testing::uniform_int(rng, 2, 3);
  const int steps = testing::uniform_int(rng, 2, max_cells / p);
  const double horizon = testing::uniform(rng, 0.5, 2.0);
  Instance inst{testing::random_system(rng, n, p, horizon, testing::uniform(rng, 0.5, 4.0),
                                       testing::uniform_int(rng, 0, 1)),
                Budgets{}, TimeGrid(horizon, steps)};
  inst.bud.alpha = Vector(p);
  for (int j = 0; j < p; ++j) {
    inst.bud.alpha(j) = inst.grid.step() * testing::uniform_int(rng, 1, steps - 1);
  }
  inst.bud.beta = testing::uniform_int(rng, 1, p - 1);
  return inst;
}

Instance zero_dynamics() {
  Instance inst{LtiSystem{Matrix::Zero(2, 2), Matrix::Identity(2, 2), 1.0}, Budgets{},
                TimeGrid(1.0, 2)};
  inst.bud.alpha = Vector::Constant(2, 0.5);
  inst.bud.beta = 1;
  return inst;
}

Instance double_integrator_pair() {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 1.0;
  Matrix b(2, 2);
  b << 1.0, 0.0, 0.3, 1.0;
  Instance inst{LtiSystem{a, b, 2.0}, Budgets{}, TimeGrid(2.0, 4)};
  inst.bud.alpha = Vector(2);
  inst.bud.alpha << 1.0, 1.5;
  inst.bud.beta = 1;
  return inst;
}

TEST(Solve, ZeroDynamicsTrace) {
  const Instance inst = zero_dynamics();
  for (SolverMethod m : kBothMethods) {
    const SolverReport r =
        solve(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid, method(m));
    EXPECT_NEAR(r.objective, 1.0, 1e-12) << to_string(m);
    EXPECT_TRUE(check_feasibility(r.schedule, inst.bud, NormMode::kL1l1, 1e-9).ok());
    EXPECT_FALSE(r.assumption.pass);
  }
  const SolverReport fp =
      solve_fixed_point(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid);
  EXPECT_TRUE(fp.schedule.is_binary());
  EXPECT_EQ(fp.schedule.values().rowwise().sum(), Vector::Ones(2));
}

TEST(Solve, InactiveConstraintsGiveFullActivation) {
  testing::Rng rng(51);
  for (MetricKind kind : {MetricKind::kTrace, MetricKind::kLogDet, MetricKind::kMinEig}) {
    const LtiSystem sys = testing::random_system(rng, 3, 2, 1.0, 2.0, false);
    const TimeGrid g(1.0, 5);
    Budgets bud;
    bud.alpha = Vector::Constant(2, 1.0);
    bud.beta = 2;
    const double full = evaluate(spec(kind), propagate(sys, Schedule::constant(2, g, 1.0)).terminal());
    for (SolverMethod m : kBothMethods) {
      const SolverReport r = solve(sys, spec(kind), bud, g, method(m));
      EXPECT_EQ(r.schedule.values(), Matrix::Ones(2, 5)) << to_string(m);
      EXPECT_NEAR(r.objective, full, 1e-12 * (1.0 + std::abs(full)));
      EXPECT_EQ(r.thresholds, Vector::Zero(2));
    }
    const SolverReport fp = solve_fixed_point(sys, spec(kind), bud, g);
    EXPECT_TRUE(fp.converged);
    EXPECT_EQ(fp.iterations, 1);
  }
}

TEST(Solve, DoubleIntegratorMatchesOracle) {
  const Instance inst = double_integrator_pair();
  const OracleResult best = brute_force_binary(inst.sys, spec(MetricKind::kTrace), inst.bud,
                                               inst.grid);
  for (SolverMethod m : kBothMethods) {
    const SolverReport r =
        solve(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid, method(m));
    EXPECT_TRUE(r.assumption.pass);
    EXPECT_LE(rel_gap(r.objective, best.best_value), 1e-8) << to_string(m);
    EXPECT_TRUE(r.schedule.is_binary()) << to_string(m);
  }
}

TEST(Solve, ReportObjectiveRecomputes) {
  testing::Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = random_instance(rng);
    for (MetricKind kind : {MetricKind::kTrace, MetricKind::kLogDet, MetricKind::kMinEig}) {
      for (SolverMethod m : kBothMethods) {
        const SolverReport r = solve(inst.sys, spec(kind), inst.bud, inst.grid, method(m));
        const double again = evaluate(spec(kind), propagate(inst.sys, r.schedule).terminal());
        EXPECT_LE(rel_gap(r.objective, again), 1e-12);
        EXPECT_TRUE(check_feasibility(r.schedule, inst.bud, NormMode::kL1l1, 1e-8).ok());
        EXPECT_GE(r.thresholds.minCoeff(), 0.0);
      }
    }
  }
}

TEST(Solve, MonotoneAscent) {
  testing::Rng rng(53);
  for (int trial = 0; trial < 12; ++trial) {
    const int p = testing::uniform_int(rng, 2, 4);
    const LtiSystem sys = testing::random_system(rng, 3, p, 1.0, 3.0, trial % 2);
    const TimeGrid g(1.0, 40);
    Budgets bud;
    bud.alpha = Vector(p);
    for (int j = 0; j < p; ++j) bud.alpha(j) = testing::uniform(rng, 0.1, 0.9);
    bud.beta = testing::uniform_int(rng, 1, p - 1);
    for (MetricKind kind : {MetricKind::kTrace, MetricKind::kLogDet, MetricKind::kMinEig}) {
      const SolverReport r = solve_projected_gradient(sys, spec(kind), bud, g);
      const double slack = kind == MetricKind::kMinEig ? 1e-6 : 1e-12;
      for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
        EXPECT_GE(r.objective_trace[i], r.objective_trace[i - 1] - slack);
      }
    }
  }
}

TEST(Solve, MethodsAgreeAndMatchOracle) {
  testing::Rng rng(54);
  int checked = 0;
  for (int trial = 0; checked < 15 && trial < 200; ++trial) {
    const Instance inst = random_instance(rng);
    const SolverReport pg = solve_projected_gradient(inst.sys, spec(MetricKind::kTrace), inst.bud,
                                                     inst.grid);
    if (!pg.assumption.pass) continue;
    ++checked;
    const SolverReport fp =
        solve_fixed_point(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid);
    const OracleResult best =
        brute_force_binary(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid);
    EXPECT_LE(rel_gap(pg.objective, fp.objective), 1e-7);
    EXPECT_LE(rel_gap(pg.objective, best.best_value), 1e-8);
    EXPECT_TRUE(fp.converged);
    EXPECT_TRUE(fp.schedule.is_binary());
    EXPECT_TRUE(check_feasibility(fp.schedule, inst.bud, NormMode::kL0l0, 0.0).ok());
    const double scale = 1.0 + std::abs(fp.objective);
    EXPECT_LE(fp.pmp.worst(), 1e-8 * scale);

    const Schedule rounded = round_and_repair(pg.schedule, inst.bud, &pg.switching);
    const double repaired =
        evaluate(spec(MetricKind::kTrace), propagate(inst.sys, rounded).terminal());
    EXPECT_LE(rel_gap(repaired, pg.objective), 1e-8);
  }
  EXPECT_EQ(checked, 15);
}

TEST(Solve, RelaxationBoundsBinaryOptimum) {
  testing::Rng rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = random_instance(rng);
    for (MetricKind kind : {MetricKind::kLogDet, MetricKind::kMinEig}) {
      const SolverReport pg = solve_projected_gradient(inst.sys, spec(kind), inst.bud, inst.grid);
      const OracleResult best = brute_force_binary(inst.sys, spec(kind), inst.bud, inst.grid);
      EXPECT_GE(pg.objective, best.best_value - 1e-9 * (1.0 + std::abs(best.best_value)));
    }
  }
}

TEST(Solve, FixedPointSelectionRule) {
  testing::Rng rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng);
    const SolverReport fp =
        solve_fixed_point(inst.sys, spec(MetricKind::kTrace), inst.bud, inst.grid);
    ASSERT_TRUE(fp.converged);
    const Matrix rule =
        select_nodes(fp.switching.interval_average, fp.thresholds, inst.bud.beta);
    int differing = 0;
    for (int k = 0; k < inst.grid.intervals(); ++k) {
      differing += rule.col(k) != fp.schedule.values().col(k);
    }
    EXPECT_LE(differing, fp.ties);
  }
}

TEST(Solve, FixedPointFlagsConstantSwitching) {
  const Instance inst = zero_dynamics();
  const SolverReport r = solve_fixed_point(inst.sys, spec(MetricKind::kLogDet), inst.bud, inst.grid);
  EXPECT_FALSE(r.assumption.pass);
  EXPECT_TRUE(std::isfinite(r.objective));
}

TEST(Solve, SeedsAreDeterministic) {
  testing::Rng rng(57);
  const Instance inst = random_instance(rng);
  for (SolverMethod m : kBothMethods) {
    SolverOptions o = method(m);
    o.seed = 1234;
    const SolverReport a = solve(inst.sys, spec(MetricKind::kLogDet), inst.bud, inst.grid, o);
    const SolverReport b = solve(inst.sys, spec(MetricKind::kLogDet), inst.bud, inst.grid, o);
    EXPECT_EQ(a.schedule.values(), b.schedule.values());
    EXPECT_EQ(a.objective_trace, b.objective_trace);
    EXPECT_TRUE(check_feasibility(a.schedule, inst.bud, NormMode::kL1l1, 1e-8).ok());
  }
}

TEST(SolverOptions, Validation) {
  SolverOptions o;
  EXPECT_FALSE(error_code_of([&] { validate_options(o); }));
  o.damping = 1.0;
  EXPECT_EQ(error_code_of([&] { validate_options(o); }), ErrorCode::kInvalidOptions);
  o = SolverOptions{};
  o.convergence_tol = 0.0;
  EXPECT_EQ(error_code_of([&] { validate_options(o); }), ErrorCode::kInvalidOptions);
  o = SolverOptions{};
  o.max_iters = 0;
  EXPECT_EQ(error_code_of([&] { validate_options(o); }), ErrorCode::kInvalidOptions);
  EXPECT_EQ(parse_solver_method("fixed_point"), SolverMethod::kFixedPoint);
  EXPECT_EQ(error_code_of([] { parse_solver_method("newton"); }), ErrorCode::kInvalidOptions);
}

TEST(SelectNodes, TopBetaPositiveWithIndexTies) {
  Matrix s(3, 3);
  s << 1.0, -1.0, 2.0,
       3.0, -2.0, 2.0,
       2.0, 0.5, 2.0;
  int ties = 0;
  const Matrix v = select_nodes(s, Vector::Zero(3), 2, &ties);
  Matrix expected(3, 3);
  expected << 0, 0, 1,
              1, 0, 1,
              1, 1, 0;
  EXPECT_EQ(v, expected);
  EXPECT_EQ(ties, 1);
  Vector theta(3);
  theta << 0.0, 2.5, 0.0;
  EXPECT_EQ(select_nodes(s, theta, 2).col(0), Vector::Unit(3, 0) + Vector::Unit(3, 2));
}

// The selection maximizes sum s_jk w_jk over all budgeted binary schedules.
TEST(FitThresholds, SelectionIsOptimalAndMultipliersConsistent) {
  testing::Rng rng(58);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = testing::uniform_int(rng, 1, 4);
    const int steps = testing::uniform_int(rng, 1, 16 / p);
    const TimeGrid g(1.0, steps);
    Budgets b;
    b.alpha = Vector(p);
    for (int j = 0; j < p; ++j) b.alpha(j) = g.step() * testing::uniform_int(rng, 1, steps);
    b.beta = testing::uniform_int(rng, 1, p);
    Matrix scores = testing::gaussian(rng, p, steps);
    if (trial % 4 == 0) scores = scores.array().round();  // many exact ties
    const ThresholdFit fit = fit_thresholds(scores, b, g.step());

    double best = -1.0;
    enumerate_feasible(b, g, p, [&](const Matrix& w) {
      best = std::max(best, scores.cwiseProduct(w).sum());
    });
    EXPECT_NEAR(scores.cwiseProduct(fit.selection).sum(), best, 1e-12);
    EXPECT_TRUE(check_feasibility(Schedule(fit.selection, g), b, NormMode::kL0l0, 0.0).ok());

    const Vector used = fit.selection.rowwise().sum() * g.step();
    for (int j = 0; j < p; ++j) {
      EXPECT_GE(fit.thresholds(j), 0.0);
      if (used(j) < b.alpha(j) - 1e-12) EXPECT_EQ(fit.thresholds(j), 0.0);
    }
    // At the multipliers, the selection attains the pointwise maximum.
    const Matrix adjusted = scores.colwise() - fit.thresholds;
    for (int k = 0; k < steps; ++k) {
      EXPECT_NEAR(adjusted.col(k).dot(fit.selection.col(k)),
                  column_hamiltonian_max(adjusted.col(k), b.beta), 1e-10);
    }
  }
}

TEST(Discreteness, Examples) {
  const TimeGrid g(1.0, 1);
  EXPECT_EQ(discreteness_report(Schedule::constant(2, g, 1.0), 0.0), 1.0);
  EXPECT_EQ(discreteness_report(Schedule::constant(1, g, 0.5), 0.4), 0.0);
  Matrix v(1, 1);
  v << 0.9995;
  EXPECT_EQ(discreteness_report(Schedule(v, g), 1e-3), 1.0);
}

TEST(RoundAndRepair, BinaryFeasibleUnchanged) {
  testing::Rng rng(59);
  const Instance inst = double_integrator_pair();
  Matrix v(2, 4);
  v << 1, 0, 1, 0,
       0, 1, 0, 1;
  const Schedule s(v, inst.grid);
  EXPECT_EQ(round_and_repair(s, inst.bud).values(), v);
}

TEST(RoundAndRepair, RoundsNearBinary) {
  const TimeGrid g(1.0, 2);
  Budgets b;
  b.alpha = Vector::Constant(1, g.step());
  b.beta = 1;
  Matrix v(1, 2);
  v << 0.999, 0.001;
  Matrix expected(1, 2);
  expected << 1, 0;
  EXPECT_EQ(round_and_repair(Schedule(v, g), b).values(), expected);
}

TEST(RoundAndRepair, DropsWeakestEntries) {
  const TimeGrid g(1.0, 4);
  Budgets b;
  b.alpha = Vector::Constant(2, 0.5);
  b.beta = 1;
  Matrix v(2, 4);
  v << 0.6, 0.7, 0.65, 0.0,
       0.0, 0.0, 0.3, 0.9;
  // Row 0 rounds to three active intervals; the weakest (0.6) goes.
  // The relaxed row sum is 1.95 * 0.25 <= 0.5, so the input is admissible.
  const Schedule out = round_and_repair(Schedule(v, g), b);
  Matrix expected(2, 4);
  expected << 0, 1, 1, 0,
              0, 0, 0, 1;
  EXPECT_EQ(out.values(), expected);
  EXPECT_TRUE(check_feasibility(out, b, NormMode::kL0l0, 0.0).ok());
}

TEST(RoundAndRepair, RejectsInfeasibleInput) {
  const TimeGrid g(1.0, 2);
  Budgets b;
  b.alpha = Vector::Constant(1, 0.5);
  b.beta = 1;
  EXPECT_EQ(error_code_of([&] { round_and_repair(Schedule::constant(1, g, 1.0), b); }),
            ErrorCode::kInfeasibleInput);
}

}  // namespace
}  // namespace sparsegram
