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
#include "sparsegram/metrics.hpp"

#include <cmath>
#include <limits>

#include "sparsegram/error.hpp"

namespace sparsegram {

namespace {

void require_symmetric(const Matrix& g) {
  if (g.rows() != g.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "metric argument must be square");
  }
  if ((g - g.transpose()).norm() > 1e-10 * g.norm()) {
    throw Error(ErrorCode::kAsymmetricMatrix, "metric argument is not symmetric");
  }
}

Matrix regularized(const MetricSpec& metric, const Matrix& g) {
  Matrix r = g;
  r.diagonal().array() += metric.epsilon;
  return r;
}

}  // namespace

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kTrace: return "trace";
    case MetricKind::kLogDet: return "log_det";
    case MetricKind::kMinEig: return "min_eig";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  if (name == "trace") return MetricKind::kTrace;
  if (name == "log_det") return MetricKind::kLogDet;
  if (name == "min_eig") return MetricKind::kMinEig;
  throw Error(ErrorCode::kInvalidMetric,
              "unknown metric kind '" + std::string(name) + "' (trace, log_det, min_eig)");
}

void validate_metric(const MetricSpec& metric) {
  if (!std::isfinite(metric.epsilon) || metric.epsilon < 0.0) {
    throw Error(ErrorCode::kInvalidMetric, "epsilon must be finite and nonnegative");
  }
  if (metric.kind == MetricKind::kLogDet && metric.epsilon <= 0.0) {
    throw Error(ErrorCode::kInvalidMetric, "log_det needs epsilon > 0");
  }
  if (!std::isfinite(metric.eig_gap_tol) || metric.eig_gap_tol < 0.0) {
    throw Error(ErrorCode::kInvalidMetric, "eig_gap_tol must be finite and nonnegative");
  }
}

double evaluate(const MetricSpec& metric, const Matrix& gramian) {
  validate_metric(metric);
  require_symmetric(gramian);
  switch (metric.kind) {
    case MetricKind::kTrace:
      return gramian.trace();
    case MetricKind::kLogDet: {
      const Matrix r = regularized(metric, gramian);
      Eigen::LLT<Matrix> llt(r);
      if (llt.info() == Eigen::Success) {
        return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      }
      // Not numerically PD; fall back to the spectrum.
      const Vector lambda = Eigen::SelfAdjointEigenSolver<Matrix>(r, Eigen::EigenvaluesOnly)
                                .eigenvalues();
      if (lambda.minCoeff() <= 0.0) return -std::numeric_limits<double>::infinity();
      return lambda.array().log().sum();
    }
    case MetricKind::kMinEig:
      return Eigen::SelfAdjointEigenSolver<Matrix>(gramian, Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  }
  return 0.0;
}

MetricGradient gradient(const MetricSpec& metric, const Matrix& gramian) {
  validate_metric(metric);
  require_symmetric(gramian);
  const Eigen::Index n = gramian.rows();
  MetricGradient out;
  switch (metric.kind) {
    case MetricKind::kTrace:
      out.value = Matrix::Identity(n, n);
      break;
    case MetricKind::kLogDet: {
      const Matrix r = regularized(metric, gramian);
      Matrix inv = r.ldlt().solve(Matrix::Identity(n, n));
      out.value = 0.5 * (inv + inv.transpose());
      break;
    }
    case MetricKind::kMinEig: {
      Eigen::SelfAdjointEigenSolver<Matrix> eig(gramian);
      const Vector u = eig.eigenvectors().col(0);
      out.value = u * u.transpose();
      if (n > 1) {
        const Vector& lambda = eig.eigenvalues();
        const double scale = std::max(std::abs(lambda(0)), std::abs(lambda(1)));
        out.multiplicity_warning = lambda(1) - lambda(0) <= metric.eig_gap_tol * scale;
      }
      break;
    }
  }
  return out;
}

}  // namespace sparsegram
