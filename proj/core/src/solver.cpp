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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "sparsegram/error.hpp"
#include "sparsegram/projection.hpp"

namespace sparsegram {

namespace {

constexpr double kTieTol = 1e-12;

// Marks the chosen nodes of one interval in `chosen`; returns true when a
// near-tie at the cutoff had to be broken by index.
bool select_column(const Vector& adjusted, int beta, std::vector<char>& chosen,
                   std::vector<int>& order) {
  const int p = static_cast<int>(adjusted.size());
  chosen.assign(p, 0);
  order.clear();
  for (int j = 0; j < p; ++j) {
    if (adjusted(j) > 0.0) order.push_back(j);
  }
  if (static_cast<int>(order.size()) <= beta) {
    for (int j : order) chosen[j] = 1;
    return false;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return adjusted(a) > adjusted(b) || (adjusted(a) == adjusted(b) && a < b);
  });
  const double cutoff = adjusted(order[beta - 1]);
  int above = 0;
  for (int j = 0; j < p; ++j) {
    if (adjusted(j) > cutoff + kTieTol) {
      chosen[j] = 1;
      ++above;
    }
  }
  // Fill the remaining slots from the near-tie group at the cutoff, lowest
  // index first.
  int open = beta - above;
  int group = 0;
  for (int j = 0; j < p; ++j) {
    if (adjusted(j) > 0.0 && std::abs(adjusted(j) - cutoff) <= kTieTol) {
      ++group;
      if (open > 0) {
        chosen[j] = 1;
        --open;
      }
    }
  }
  return group > beta - above;
}

// Residual network for the interval-selection LP
//   max sum s_jk v_jk  s.t.  sum_k v_jk <= c_j,  sum_j v_jk <= beta,  0 <= v <= 1,
// whose constraint matrix is a bipartite incidence matrix, so optimal flows
// are integral. Arc costs are negated scores.
class SelectionFlow {
 public:
  SelectionFlow(const Matrix& scores, const std::vector<int>& caps, int beta)
      : p_(static_cast<int>(scores.rows())), steps_(static_cast<int>(scores.cols())),
        adj_(p_ + steps_ + 2),
        slack_(1e-12 * std::max(1.0, scores.cwiseAbs().maxCoeff())) {
    for (int j = 0; j < p_; ++j) add_arc(source(), node(j), caps[j], 0.0);
    for (int j = 0; j < p_; ++j) {
      for (int k = 0; k < steps_; ++k) {
        if (scores(j, k) > 0.0) {
          pair_arc_[static_cast<std::size_t>(j) * steps_ + k] = arcs_.size();
          add_arc(node(j), interval(k), 1, -scores(j, k));
        }
      }
    }
    for (int k = 0; k < steps_; ++k) add_arc(interval(k), sink(), beta, 0.0);
  }

  // Successive shortest paths; stops once no augmenting path has negative
  // cost, which leaves a maximum-weight (not maximum-cardinality) flow.
  void solve() {
    while (true) {
      std::vector<double> dist;
      std::vector<std::size_t> via;
      shortest_paths(source(), dist, &via);
      if (!std::isfinite(dist[sink()]) || dist[sink()] >= -slack_) break;
      std::vector<std::size_t> path;
      for (int v = sink(); v != source() && path.size() <= adj_.size(); v = arcs_[via[v] ^ 1].to) {
        path.push_back(via[v]);
      }
      if (path.size() > adj_.size()) break;  // predecessor cycle left by a capped pass
      for (std::size_t a : path) {
        arcs_[a].cap -= 1;
        arcs_[a ^ 1].cap += 1;
      }
      ++flow_;
    }
  }

  bool selected(int j, int k) const {
    const auto it = pair_arc_.find(static_cast<std::size_t>(j) * steps_ + k);
    return it != pair_arc_.end() && arcs_[it->second].cap == 0;
  }

  // Node potentials of the optimal flow: minus the shortest distances to the
  // source in the residual network closed by a zero-cost sink -> source arc.
  // Reduced costs are then nonnegative (LP dual feasibility), and among all
  // such potentials these are the smallest, so thresholds are as low as the
  // selection allows.
  std::vector<double> potentials() {
    add_arc(sink(), source(), std::numeric_limits<int>::max() / 2, 0.0);
    arcs_[arcs_.size() - 1].cap = flow_;  // reverse: source -> sink
    std::vector<double> dist;
    shortest_paths(source(), dist, nullptr, /*toward=*/true);
    for (double& d : dist) d = -d;
    return dist;
  }

  int node(int j) const { return 1 + j; }

 private:
  struct Arc {
    int to;
    int cap;
    double cost;
  };

  int source() const { return 0; }
  int interval(int k) const { return 1 + p_ + k; }
  int sink() const { return 1 + p_ + steps_; }

  void add_arc(int from, int to, int cap, double cost) {
    adj_[from].push_back(arcs_.size());
    arcs_.push_back({to, cap, cost});
    adj_[to].push_back(arcs_.size());
    arcs_.push_back({from, 0, -cost});
  }

  // Queue-based Bellman-Ford. In exact arithmetic the residual network has
  // no negative cycle; rounding can leave cycles of cost about slack_, so
  // improvements below slack_ are ignored and the pass count is capped.
  // With `toward`, distances are to `from` rather than from it.
  void shortest_paths(int from, std::vector<double>& dist, std::vector<std::size_t>* via,
                      bool toward = false) const {
    const std::size_t count = adj_.size();
    dist.assign(count, std::numeric_limits<double>::infinity());
    if (via) via->assign(count, 0);
    std::vector<char> queued(count, 0);
    std::vector<std::size_t> pushes(count, 0);
    std::vector<int> queue{from};
    dist[from] = 0.0;
    queued[from] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int u = queue[head];
      queued[u] = 0;
      for (std::size_t a : adj_[u]) {
        // Walking backwards, a's partner a ^ 1 is the arc from a.to into u.
        const Arc& arc = arcs_[a];
        const Arc& used = toward ? arcs_[a ^ 1] : arc;
        if (used.cap <= 0) continue;
        const double candidate = dist[u] + used.cost;
        if (candidate < dist[arc.to] - slack_) {
          dist[arc.to] = candidate;
          if (via) (*via)[arc.to] = a;
          if (!queued[arc.to] && ++pushes[arc.to] <= count) {
            queued[arc.to] = 1;
            queue.push_back(arc.to);
          }
        }
      }
    }
  }

  int p_;
  int steps_;
  int flow_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  double slack_;
  std::unordered_map<std::size_t, std::size_t> pair_arc_;
};

Matrix clamp_box(const Matrix& v) { return v.cwiseMax(0.0).cwiseMin(1.0); }

struct Problem {
  const LtiSystem& sys;
  const MetricSpec& metric;
  const Budgets& bud;
  const TimeGrid& grid;
  SensitivityBasis basis;

  double objective(const Matrix& v) const {
    return evaluate(metric, basis.terminal_gramian(v));
  }
  // dJ/dv_jk / dt
  Matrix scores(const Matrix& v, bool* multiplicity = nullptr) const {
    const MetricGradient g = gradient(metric, basis.terminal_gramian(v));
    if (multiplicity) *multiplicity = g.multiplicity_warning;
    return basis.interval_scores(g.value);
  }
};

Problem make_problem(const LtiSystem& sys, const MetricSpec& metric, const Budgets& bud,
                     const TimeGrid& grid, const SolverOptions& opts) {
  validate_system(sys);
  validate_metric(metric);
  validate_budgets(bud, sys.num_nodes(), sys.horizon);
  validate_options(opts);
  if (!grid.matches(TimeGrid(sys.horizon, grid.intervals()))) {
    throw Error(ErrorCode::kGridMismatch, "grid horizon differs from the system horizon");
  }
  return Problem{sys, metric, bud, grid, SensitivityBasis(sys, grid)};
}

SolverReport finalize(const Problem& prob, const SolverOptions& opts, SolverMethod method,
                      const Matrix& values, const Vector* thresholds,
                      std::vector<double> trace, int iterations, bool converged, int ties) {
  SolverReport rep;
  rep.method = method;
  rep.schedule = Schedule(clamp_box(values), prob.grid);
  const GramianTrajectory traj = propagate(prob.sys, rep.schedule);
  rep.objective = evaluate(prob.metric, traj.terminal());
  const MetricGradient grad = gradient(prob.metric, traj.terminal());
  rep.multiplicity_warning = grad.multiplicity_warning;
  rep.switching = switching_functions(prob.sys, prob.basis, grad.value);
  if (thresholds) {
    rep.thresholds = *thresholds;
    rep.ties = ties;
  } else {
    const ThresholdFit fit = fit_thresholds(rep.switching.interval_average, prob.bud,
                                            prob.grid.step(), opts.threshold_bisection_tol);
    rep.thresholds = fit.thresholds;
    rep.ties = fit.ties;
  }
  rep.assumption = check_assumption(rep.switching, opts.assumption_tol);
  rep.pmp = verify_pmp(prob.sys, prob.metric, prob.bud, rep.schedule, rep.thresholds);
  rep.discreteness_fraction = discreteness_report(rep.schedule, opts.discreteness_tol);
  rep.objective_trace = std::move(trace);
  rep.iterations = iterations;
  rep.converged = converged;
  return rep;
}

}  // namespace

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kProjectedGradient: return "projected_gradient";
    case SolverMethod::kFixedPoint: return "fixed_point";
  }
  return "unknown";
}

SolverMethod parse_solver_method(std::string_view name) {
  if (name == "projected_gradient") return SolverMethod::kProjectedGradient;
  if (name == "fixed_point") return SolverMethod::kFixedPoint;
  throw Error(ErrorCode::kInvalidOptions,
              "unknown solver method '" + std::string(name) +
                  "' (projected_gradient, fixed_point)");
}

void validate_options(const SolverOptions& opts) {
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (opts.max_iters < 1) throw Error(ErrorCode::kInvalidOptions, "max_iters must be >= 1");
  if (!positive(opts.step_size)) throw Error(ErrorCode::kInvalidOptions, "step_size must be > 0");
  if (!(opts.damping >= 0.0 && opts.damping < 1.0)) {
    throw Error(ErrorCode::kInvalidOptions, "damping must lie in [0, 1)");
  }
  if (!positive(opts.convergence_tol) || !positive(opts.threshold_bisection_tol)) {
    throw Error(ErrorCode::kInvalidOptions, "tolerances must be positive");
  }
  if (!(opts.assumption_tol >= 0.0) || !(opts.discreteness_tol >= 0.0)) {
    throw Error(ErrorCode::kInvalidOptions, "diagnostic tolerances must be nonnegative");
  }
}

Matrix select_nodes(const Matrix& scores, const Vector& thresholds, int beta, int* ties) {
  Matrix sel = Matrix::Zero(scores.rows(), scores.cols());
  std::vector<char> chosen;
  std::vector<int> order;
  int tie_count = 0;
  for (Eigen::Index k = 0; k < scores.cols(); ++k) {
    const Vector adjusted = scores.col(k) - thresholds;
    tie_count += select_column(adjusted, beta, chosen, order);
    for (Eigen::Index j = 0; j < scores.rows(); ++j) sel(j, k) = chosen[j];
  }
  if (ties) *ties = tie_count;
  return sel;
}

ThresholdFit fit_thresholds(const Matrix& scores, const Budgets& bud, double dt, double tol) {
  const int p = static_cast<int>(scores.rows());
  const int steps = static_cast<int>(scores.cols());
  if (bud.alpha.size() != p) {
    throw Error(ErrorCode::kDimensionMismatch, "budgets and scores disagree on p");
  }
  std::vector<int> caps(p);
  for (int j = 0; j < p; ++j) caps[j] = std::min(steps, bud.max_active_intervals(j, dt));

  SelectionFlow flow(scores, caps, bud.beta);
  flow.solve();
  const std::vector<double> pi = flow.potentials();

  ThresholdFit fit;
  fit.sweeps = 1;
  fit.thresholds = Vector::Zero(p);
  fit.selection = Matrix::Zero(p, steps);
  for (int j = 0; j < p; ++j) {
    const double d = pi[flow.node(j)];
    double theta = std::isfinite(d) ? d : std::max(0.0, scores.row(j).maxCoeff());
    // Potentials carry roundoff of order tol; a threshold that small is zero.
    if (theta <= tol * std::max(1.0, scores.cwiseAbs().maxCoeff())) theta = 0.0;
    fit.thresholds(j) = theta;
    for (int k = 0; k < steps; ++k) fit.selection(j, k) = flow.selected(j, k) ? 1.0 : 0.0;
  }
  // Ties: intervals where the pointwise rule at these thresholds does not pin
  // down the optimal selection uniquely.
  int near = 0;
  const Matrix rule = select_nodes(scores, fit.thresholds, bud.beta, &near);
  int differing = 0;
  for (int k = 0; k < steps; ++k) differing += rule.col(k) != fit.selection.col(k);
  fit.ties = std::max(near, differing);
  return fit;
}

SolverReport solve_projected_gradient(const LtiSystem& sys, const MetricSpec& metric,
                                      const Budgets& bud, const TimeGrid& grid,
                                      const SolverOptions& opts) {
  const Problem prob = make_problem(sys, metric, bud, grid, opts);
  const int p = sys.num_nodes();
  const double dt = grid.step();

  Matrix v(p, grid.intervals());
  if (opts.seed == 0) {
    for (int j = 0; j < p; ++j) {
      const double level = std::min({1.0, bud.alpha(j) / sys.horizon,
                                     static_cast<double>(bud.beta) / p});
      v.row(j).setConstant(level);
    }
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = unit(rng);
    v = project_feasible(v, bud, dt).values;
  }

  double value = prob.objective(v);
  std::vector<double> trace{value};
  const double max_step = opts.step_size * 1e4;
  double step = opts.step_size;
  bool converged = false;
  int it = 0;
  while (it < opts.max_iters) {
    ++it;
    const Matrix grad = prob.scores(v) * dt;
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (gmax == 0.0) {
      converged = true;
      break;
    }
    const Matrix dir = grad / gmax;
    const Matrix probe = project_feasible(v + dir, bud, dt).values;
    if ((probe - v).cwiseAbs().maxCoeff() <= opts.convergence_tol) {
      converged = true;
      break;
    }

    bool accepted = false;
    Matrix trial;
    double trial_value = value;
    while (step >= 1e-14 * opts.step_size) {
      trial = project_feasible(v + step * dir, bud, dt).values;
      trial_value = prob.objective(trial);
      if (trial_value > value) {
        accepted = true;
        break;
      }
      if (!opts.adaptive_step) break;
      step *= 0.5;
    }
    if (!accepted) {
      // No ascent along the projected arc down to the smallest step.
      converged = true;
      break;
    }
    const double gain = trial_value - value;
    const double moved = (trial - v).cwiseAbs().maxCoeff();
    v = std::move(trial);
    value = trial_value;
    trace.push_back(value);
    if (opts.adaptive_step) step = std::min(2.0 * step, max_step);
    if (gain <= opts.convergence_tol * (1.0 + std::abs(value)) &&
        moved <= opts.convergence_tol) {
      converged = true;
      break;
    }
  }
  return finalize(prob, opts, SolverMethod::kProjectedGradient, v, nullptr, std::move(trace),
                  it, converged, 0);
}

SolverReport solve_fixed_point(const LtiSystem& sys, const MetricSpec& metric,
                               const Budgets& bud, const TimeGrid& grid,
                               const SolverOptions& opts) {
  const Problem prob = make_problem(sys, metric, bud, grid, opts);
  const int p = sys.num_nodes();
  const int steps = grid.intervals();
  const double dt = grid.step();

  Matrix v;
  if (opts.seed == 0) {
    v = select_nodes(prob.scores(Matrix::Ones(p, steps)), Vector::Zero(p), bud.beta);
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix random_scores(p, steps);
    for (Eigen::Index i = 0; i < random_scores.size(); ++i) random_scores.data()[i] = unit(rng);
    v = fit_thresholds(random_scores, bud, dt, opts.threshold_bisection_tol).selection;
  }

  std::vector<double> trace;
  Matrix history;
  bool converged = false;
  int it = 0;
  ThresholdFit current;

  double best_value = -std::numeric_limits<double>::infinity();
  Matrix best_v;
  ThresholdFit best_fit;

  while (it < opts.max_iters) {
    ++it;
    const Matrix scores = prob.scores(v);
    current = fit_thresholds(scores, bud, dt, opts.threshold_bisection_tol);
    if (current.selection == v) {
      converged = true;
      break;
    }
    if (history.size() == 0) {
      history = scores;
    } else {
      history = opts.damping * history + (1.0 - opts.damping) * scores;
    }
    Matrix next = history == scores
                      ? current.selection
                      : fit_thresholds(history, bud, dt, opts.threshold_bisection_tol).selection;
    if (next == v) next = current.selection;
    v = std::move(next);
    const double value = prob.objective(v);
    trace.push_back(value);
    if (value > best_value) {
      best_value = value;
      best_v = v;
      best_fit = current;
    }
  }

  if (converged) {
    if (trace.empty()) trace.push_back(prob.objective(v));
    return finalize(prob, opts, SolverMethod::kFixedPoint, v, &current.thresholds,
                    std::move(trace), it, true, current.ties);
  }
  // Cycling or out of iterations: report the best iterate seen; its
  // thresholds are refitted at that schedule.
  const ThresholdFit refit =
      fit_thresholds(prob.scores(best_v), bud, dt, opts.threshold_bisection_tol);
  return finalize(prob, opts, SolverMethod::kFixedPoint, best_v, &refit.thresholds,
                  std::move(trace), it, false, refit.ties);
}

SolverReport solve(const LtiSystem& sys, const MetricSpec& metric, const Budgets& bud,
                   const TimeGrid& grid, const SolverOptions& opts) {
  switch (opts.method) {
    case SolverMethod::kProjectedGradient:
      return solve_projected_gradient(sys, metric, bud, grid, opts);
    case SolverMethod::kFixedPoint:
      return solve_fixed_point(sys, metric, bud, grid, opts);
  }
  throw Error(ErrorCode::kInvalidOptions, "unknown solver method");
}

double discreteness_report(const Schedule& sch, double tol) {
  const auto& v = sch.values().array();
  const auto near = (v.abs() <= tol || (1.0 - v).abs() <= tol).cast<double>();
  return near.sum() / static_cast<double>(v.size());
}

Schedule round_and_repair(const Schedule& sch, const Budgets& bud,
                          const SwitchingProfile* profile) {
  constexpr double kInputTol = 1e-6;
  const FeasibilityReport feas = check_feasibility(sch, bud, NormMode::kL1l1, kInputTol);
  if (!feas.ok()) {
    throw Error(ErrorCode::kInfeasibleInput,
                "schedule violates the relaxed constraints by " +
                    std::to_string(feas.worst_violation));
  }
  const Matrix& values = sch.values();
  const Matrix& rank = profile ? profile->interval_average : values;
  if (rank.rows() != values.rows() || rank.cols() != values.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "switching profile does not match the schedule");
  }
  Matrix out = (values.array() >= 0.5).cast<double>().matrix();
  const double dt = sch.grid().step();

  auto drop_weakest = [&](auto&& entries, int excess) {
    std::sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
      const double ra = rank(a.first, a.second);
      const double rb = rank(b.first, b.second);
      return ra < rb || (ra == rb && values(a.first, a.second) < values(b.first, b.second));
    });
    for (int i = 0; i < excess; ++i) out(entries[i].first, entries[i].second) = 0.0;
  };

  for (Eigen::Index j = 0; j < out.rows(); ++j) {
    const int cap = bud.max_active_intervals(static_cast<int>(j), dt);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> active;
    for (Eigen::Index k = 0; k < out.cols(); ++k) {
      if (out(j, k) == 1.0) active.emplace_back(j, k);
    }
    const int excess = static_cast<int>(active.size()) - cap;
    if (excess > 0) drop_weakest(active, excess);
  }
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> active;
    for (Eigen::Index j = 0; j < out.rows(); ++j) {
      if (out(j, k) == 1.0) active.emplace_back(j, k);
    }
    const int excess = static_cast<int>(active.size()) - bud.beta;
    if (excess > 0) drop_weakest(active, excess);
  }
  return Schedule(std::move(out), sch.grid());
}

}  // namespace sparsegram
