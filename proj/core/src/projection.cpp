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
#include "sparsegram/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

Matrix dykstra(const Matrix& y, const Budgets& bud, double dt, const ProjectionOptions& opts,
               ProjectionResult& out);

double clamped_sum(const Eigen::Ref<const Vector>& y, double tau) {
  return (y.array() - tau).max(0.0).min(1.0).sum();
}

void project_rows(Matrix& x, const Budgets& bud, double dt) {
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const Vector row = x.row(j).transpose();
    const double tau = capped_simplex_shift(row, bud.alpha(j) / dt);
    x.row(j) = (row.array() - tau).max(0.0).min(1.0).transpose();
  }
}

void project_columns(Matrix& x, int beta) {
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const Vector col = x.col(k);
    const double tau = capped_simplex_shift(col, beta);
    x.col(k) = (col.array() - tau).max(0.0).min(1.0);
  }
}

double row_excess(const Matrix& x, const Budgets& bud, double dt) {
  const Vector used = x.rowwise().sum() * dt;
  return std::max(0.0, (used - bud.alpha).maxCoeff());
}

// Projection for fixed row multipliers mu: each column is projected onto
// {box, sum <= beta} after shifting row j down by mu_j.
struct ColumnState {
  Matrix values;
  Vector row_sums;
  Matrix hessian;  // -d(row_sums)/d(mu), symmetric PSD
};

ColumnState project_shifted(const Matrix& y, const Vector& mu, int beta) {
  const Eigen::Index p = y.rows();
  ColumnState st{Matrix(p, y.cols()), Vector::Zero(p), Matrix::Zero(p, p)};
  std::vector<Eigen::Index> free;
  Vector z(p);
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    z = y.col(k) - mu;
    const double tau = capped_simplex_shift(z, beta);
    free.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double w = z(j) - tau;
      st.values(j, k) = std::clamp(w, 0.0, 1.0);
      if (w > 0.0 && w < 1.0) free.push_back(j);
    }
    const double share = (tau > 0.0 && !free.empty()) ? 1.0 / free.size() : 0.0;
    for (Eigen::Index a : free) {
      st.hessian(a, a) += 1.0;
      for (Eigen::Index b : free) st.hessian(a, b) -= share;
    }
  }
  st.row_sums = st.values.rowwise().sum();
  return st;
}

// Row sum of node j alone as a function of its own multiplier.
double row_sum_at(const Matrix& y, Vector& mu, Eigen::Index j, double value, int beta) {
  const double saved = mu(j);
  mu(j) = value;
  double sum = 0.0;
  Vector z(mu.size());
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    z = y.col(k) - mu;
    sum += std::clamp(z(j) - capped_simplex_shift(z, beta), 0.0, 1.0);
  }
  mu(j) = saved;
  return sum;
}

// Exact maximization of the dual over mu_j with the others fixed: the
// smallest mu_j >= 0 with s_j(mu) <= cap_j. s_j is piecewise linear and
// nonincreasing in mu_j, so bisection narrows to one linear piece and the
// root is interpolated.
double coordinate_solve(const Matrix& y, Vector& mu, Eigen::Index j, double cap, int beta) {
  double lo = 0.0;
  double s_lo = row_sum_at(y, mu, j, lo, beta);
  if (s_lo <= cap) return 0.0;
  double hi = std::max(1.0, y.row(j).maxCoeff() + 1.0);
  double s_hi = row_sum_at(y, mu, j, hi, beta);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
    const double guess = lo + (s_lo - cap) * (hi - lo) / (s_lo - s_hi);
    const double mid = (it % 2 == 0 && guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    const double s_mid = row_sum_at(y, mu, j, mid, beta);
    if (std::abs(s_mid - cap) <= 1e-14 * (1.0 + cap)) return mid;
    if (s_mid > cap) {
      lo = mid;
      s_lo = s_mid;
    } else {
      hi = mid;
      s_hi = s_mid;
    }
  }
  return hi;
}

struct Slope {
  double value;      // d^T (s(mu + t d) - cap), the dual's derivative in t
  double curvature;  // -d^T H d, its derivative on the current linear piece
};

Slope dual_slope(const Matrix& y, const Vector& mu, const Vector& d, double t, const Vector& caps,
                 int beta) {
  const ColumnState st = project_shifted(y, mu + t * d, beta);
  return {d.dot(st.row_sums - caps), -d.dot(st.hessian * d)};
}

// Largest t in [0, t_max] with nonnegative dual slope. The slope is
// nonincreasing and piecewise linear in t (the dual is concave and piecewise
// quadratic), so a Newton step from either end of the bracket is exact once
// both lie on the root's piece. Bisection guards against slow progress.
double line_search(const Matrix& y, const Vector& mu, const Vector& d, double t_max,
                   const Vector& caps, int beta) {
  const double flat = 1e-13 * d.lpNorm<1>() * (1.0 + caps.cwiseAbs().maxCoeff());
  double lo = 0.0;
  Slope at_lo = dual_slope(y, mu, d, 0.0, caps, beta);
  double hi = at_lo.curvature < 0.0 ? at_lo.value / -at_lo.curvature : 1.0;
  if (std::isfinite(t_max)) hi = std::min(hi, t_max);
  Slope at_hi = dual_slope(y, mu, d, hi, caps, beta);
  while (at_hi.value > flat) {
    if (hi >= t_max || hi > 1e18) return hi;
    lo = hi;
    at_lo = at_hi;
    hi = std::min(t_max, 4.0 * hi);
    at_hi = dual_slope(y, mu, d, hi, caps, beta);
  }
  if (at_hi.value >= -flat) return hi;
  double width = hi - lo;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    const double from_lo = at_lo.curvature < 0.0 ? lo + at_lo.value / -at_lo.curvature : hi;
    const double from_hi = at_hi.curvature < 0.0 ? hi - at_hi.value / at_hi.curvature : lo;
    if (hi - lo <= 0.5 * width || it == 0) {
      if (from_lo > lo && from_lo < hi) {
        mid = from_lo;
      } else if (from_hi > lo && from_hi < hi) {
        mid = from_hi;
      }
    }
    width = hi - lo;
    const Slope at_mid = dual_slope(y, mu, d, mid, caps, beta);
    if (std::abs(at_mid.value) <= flat) return mid;
    if (at_mid.value > 0.0) {
      lo = mid;
      at_lo = at_mid;
    } else {
      hi = mid;
      at_hi = at_mid;
    }
  }
  return lo;
}

// Solves the complementarity system
//   mu_j >= 0,  s_j(mu) <= cap_j,  mu_j (cap_j - s_j(mu)) = 0
// for the row multipliers, where s(mu) is the row-sum vector of the
// column-wise projection. These are the optimality conditions of the concave,
// piecewise quadratic dual with gradient s - cap and Hessian -H. Each step
// moves the free multipliers along either the gradient's component in the
// null space of H (nonempty where every column cap binds) or, when that is
// zero, the Newton direction, and is followed by an exact line search. When no ascent step exists a
// Gauss-Seidel sweep of exact coordinate solves is taken instead.
bool project_by_multipliers(const Matrix& y, const Vector& caps, int beta, double tol,
                            Matrix& out, int& iterations) {
  const Eigen::Index p = y.rows();
  Vector mu = Vector::Zero(p);
  ColumnState st = project_shifted(y, mu, beta);
  for (iterations = 1; iterations <= 200; ++iterations) {
    const Vector grad = st.row_sums - caps;
    double norm = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) norm = std::max(norm, std::abs(std::min(mu(j), -grad(j))));
    if (norm <= tol) {
      out = std::move(st.values);
      return true;
    }

    std::vector<char> active(p, 0);
    for (Eigen::Index j = 0; j < p; ++j) active[j] = mu(j) <= 0.0 && grad(j) <= 0.0;
    Vector d;
    double t_max = 0.0;
    for (int pass = 0; pass <= p; ++pass) {
      std::vector<Eigen::Index> free;
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!active[j]) free.push_back(j);
      }
      d = Vector::Zero(p);
      if (free.empty()) break;
      const Eigen::Index m = static_cast<Eigen::Index>(free.size());
      Matrix h(m, m);
      Vector r(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        r(a) = grad(free[a]);
        for (Eigen::Index b = 0; b < m; ++b) h(a, b) = st.hessian(free[a], free[b]);
      }
      const Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
      const double floor = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
      // Flat directions first: along them the dual is linear until some
      // column's cap stops binding, which only a line search can locate.
      Vector flat = Vector::Zero(m);
      Vector newton = Vector::Zero(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        const double lambda = eig.eigenvalues()(i);
        const double weight = eig.eigenvectors().col(i).dot(r);
        if (lambda > floor) {
          newton += weight / lambda * eig.eigenvectors().col(i);
        } else {
          flat += weight * eig.eigenvectors().col(i);
        }
      }
      const Vector step = flat.squaredNorm() > 1e-24 * r.squaredNorm() ? flat : newton;
      for (Eigen::Index a = 0; a < m; ++a) d(free[a]) = step(a);
      // Free multipliers already at zero cannot decrease; pin them and retry.
      bool pinned = false;
      t_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index j : free) {
        if (d(j) >= 0.0) continue;
        if (mu(j) <= 0.0) {
          active[j] = 1;
          pinned = true;
        } else {
          t_max = std::min(t_max, -mu(j) / d(j));
        }
      }
      if (!pinned) break;
    }

    bool moved = false;
    if (d.dot(grad) > 0.0) {
      const double t = line_search(y, mu, d, t_max, caps, beta);
      if (t > 0.0) {
        for (Eigen::Index j = 0; j < p; ++j) {
          // The blocking multiplier lands on zero exactly.
          const bool blocks = t == t_max && d(j) < 0.0 && -mu(j) / d(j) <= t_max;
          mu(j) = blocks ? 0.0 : std::max(0.0, mu(j) + t * d(j));
        }
        moved = true;
      }
    }
    if (!moved) {
      for (Eigen::Index j = 0; j < p; ++j) mu(j) = coordinate_solve(y, mu, j, caps(j), beta);
    }
    st = project_shifted(y, mu, beta);
  }
  return false;
}

}  // namespace

double capped_simplex_shift(const Eigen::Ref<const Vector>& y, double cap) {
  if (clamped_sum(y, 0.0) <= cap) return 0.0;
  // f(tau) = sum clamp(y_i - tau, 0, 1) is piecewise linear and nonincreasing
  // with breakpoints at y_i - 1 and y_i. Locate the segment containing the
  // root and interpolate.
  thread_local std::vector<double> knots;
  knots.clear();
  knots.push_back(0.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) > 0.0) knots.push_back(y(i));
    if (y(i) - 1.0 > 0.0) knots.push_back(y(i) - 1.0);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double lo = knots.front();
  double f_lo = clamped_sum(y, lo);
  for (std::size_t i = 1; i < knots.size(); ++i) {
    const double hi = knots[i];
    const double f_hi = clamped_sum(y, hi);
    if (f_hi <= cap) {
      if (f_lo == f_hi) return hi;
      return lo + (f_lo - cap) * (hi - lo) / (f_lo - f_hi);
    }
    lo = hi;
    f_lo = f_hi;
  }
  return knots.back();
}

ProjectionResult project_feasible(const Matrix& y, const Budgets& bud, double dt,
                                  const ProjectionOptions& opts) {
  if (bud.alpha.size() != y.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "budgets and values disagree on p");
  }
  ProjectionResult out;
  const Vector caps = bud.alpha / dt;
  Matrix x;
  if (project_by_multipliers(y, caps, bud.beta, opts.feasibility_tol, x, out.iterations)) {
    out.converged = true;
  } else {
    x = dykstra(y, bud, dt, opts, out);
  }
  // x satisfies the column caps and the box exactly; shrinking an offending
  // row preserves both and removes the residual row excess.
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    const double used = x.row(j).sum() * dt;
    if (used > bud.alpha(j)) x.row(j) *= bud.alpha(j) / used;
  }
  out.values = std::move(x);
  return out;
}

namespace {

Matrix dykstra(const Matrix& y, const Budgets& bud, double dt, const ProjectionOptions& opts,
               ProjectionResult& out) {
  Matrix x = y;
  Matrix inc_rows = Matrix::Zero(y.rows(), y.cols());
  Matrix inc_cols = Matrix::Zero(y.rows(), y.cols());
  for (int it = 1; it <= opts.max_iters; ++it) {
    Matrix z = x + inc_rows;
    project_rows(z, bud, dt);
    inc_rows = x + inc_rows - z;

    Matrix next = z + inc_cols;
    project_columns(next, bud.beta);
    inc_cols = z + inc_cols - next;

    const double change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    out.iterations = it;
    if (change <= opts.change_tol && row_excess(x, bud, dt) <= opts.feasibility_tol) {
      out.converged = true;
      break;
    }
  }
  return x;
}

}  // namespace

}  // namespace sparsegram
