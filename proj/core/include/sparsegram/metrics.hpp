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
#ifndef SPARSEGRAM_METRICS_HPP
#define SPARSEGRAM_METRICS_HPP

#include <string>
#include <string_view>

#include "sparsegram/model.hpp"

namespace sparsegram {

enum class MetricKind { kTrace, kLogDet, kMinEig };

std::string_view to_string(MetricKind kind);
MetricKind parse_metric_kind(std::string_view name);

/// Controllability metric K(G). log_det is regularized as log det(G + eps I);
/// eig_gap_tol is the relative gap below which min_eig reports a repeated
/// smallest eigenvalue.
struct MetricSpec {
  MetricKind kind = MetricKind::kTrace;
  double epsilon = 1e-8;
  double eig_gap_tol = 1e-8;
};

void validate_metric(const MetricSpec& metric);

double evaluate(const MetricSpec& metric, const Matrix& gramian);

struct MetricGradient {
  Matrix value;
  // min_eig only: the two smallest eigenvalues are within eig_gap_tol, so
  // value is one element of the subdifferential rather than the gradient.
  bool multiplicity_warning = false;
};

/// dK/dG. Always symmetric and positive semidefinite for the supported kinds.
MetricGradient gradient(const MetricSpec& metric, const Matrix& gramian);

}  // namespace sparsegram

#endif  // SPARSEGRAM_METRICS_HPP
