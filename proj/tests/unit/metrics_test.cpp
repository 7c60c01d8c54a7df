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

#include <gtest/gtest.h>

#include "sparsegram/error.hpp"
#include "testing.hpp"

namespace sparsegram {
namespace {

using testing::error_code_of;

MetricSpec spec(MetricKind kind) {
  MetricSpec m;
  m.kind = kind;
  return m;
}

Matrix diag(std::initializer_list<double> d) {
  Vector v(static_cast<Eigen::Index>(d.size()));
  int i = 0;
  for (double x : d) v(i++) = x;
  return v.asDiagonal();
}

constexpr MetricKind kAllKinds[] = {MetricKind::kTrace, MetricKind::kLogDet, MetricKind::kMinEig};

TEST(Evaluate, Examples) {
  EXPECT_DOUBLE_EQ(evaluate(spec(MetricKind::kTrace), diag({1, 2, 3})), 6.0);
  EXPECT_NEAR(evaluate(spec(MetricKind::kLogDet), diag({1, std::exp(1.0)})), 1.0, 1e-7);
  EXPECT_NEAR(evaluate(spec(MetricKind::kMinEig), diag({0.1, 5})), 0.1, 1e-15);
}

TEST(Evaluate, LogDetRegularization) {
  MetricSpec m = spec(MetricKind::kLogDet);
  m.epsilon = 1e-3;
  EXPECT_NEAR(evaluate(m, Matrix::Zero(2, 2)), 2.0 * std::log(1e-3), 1e-12);
  EXPECT_NEAR(evaluate(m, diag({1, 2})), std::log(1.001) + std::log(2.001), 1e-13);
}

TEST(Evaluate, RejectsAsymmetric) {
  Matrix g = diag({1, 1});
  g(0, 1) = 1e-6;
  for (MetricKind k : kAllKinds) {
    EXPECT_EQ(error_code_of([&] { evaluate(spec(k), g); }), ErrorCode::kAsymmetricMatrix);
    EXPECT_EQ(error_code_of([&] { gradient(spec(k), g); }), ErrorCode::kAsymmetricMatrix);
  }
}

TEST(MetricSpec, Validation) {
  MetricSpec m = spec(MetricKind::kLogDet);
  m.epsilon = 0.0;
  EXPECT_EQ(error_code_of([&] { validate_metric(m); }), ErrorCode::kInvalidMetric);
  m.kind = MetricKind::kTrace;
  EXPECT_FALSE(error_code_of([&] { validate_metric(m); }));
  EXPECT_EQ(parse_metric_kind("log_det"), MetricKind::kLogDet);
  EXPECT_EQ(to_string(MetricKind::kMinEig), "min_eig");
  EXPECT_EQ(error_code_of([] { parse_metric_kind("det"); }), ErrorCode::kInvalidMetric);
}

TEST(Gradient, Examples) {
  EXPECT_EQ(gradient(spec(MetricKind::kTrace), diag({4, 5, 6})).value, Matrix::Identity(3, 3));
  EXPECT_LE((gradient(spec(MetricKind::kLogDet), diag({1, 1})).value - diag({1, 1})).norm(),
            1e-7);
  const MetricGradient g = gradient(spec(MetricKind::kMinEig), diag({0.1, 5}));
  EXPECT_LE((g.value - diag({1, 0})).norm(), 1e-15);
  EXPECT_FALSE(g.multiplicity_warning);
}

TEST(Gradient, MinEigMultiplicityFlag) {
  const MetricGradient g = gradient(spec(MetricKind::kMinEig), diag({1, 1 + 1e-12, 3}));
  EXPECT_TRUE(g.multiplicity_warning);
  EXPECT_NEAR(g.value.trace(), 1.0, 1e-14);
}

TEST(Gradient, SymmetricAndPsd) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = testing::uniform_int(rng, 1, 5);
    const Matrix g = testing::random_psd(rng, n, 0.0, 3.0);
    for (MetricKind k : kAllKinds) {
      const Matrix d = gradient(spec(k), g).value;
      EXPECT_EQ(d, d.transpose());
      EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(d).eigenvalues()(0), -1e-12);
    }
  }
}

TEST(Gradient, CentralDifferences) {
  testing::Rng rng(22);
  const double h = 1e-5;
  for (MetricKind k : kAllKinds) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = testing::uniform_int(rng, 1, 5);
      const Matrix g = testing::random_psd(rng, n);
      const Matrix grad = gradient(spec(k), g).value;
      for (int dir = 0; dir < 20; ++dir) {
        const Matrix delta = testing::random_symmetric(rng, n);
        const double fd =
            (evaluate(spec(k), g + h * delta) - evaluate(spec(k), g - h * delta)) / (2.0 * h);
        const double exact = grad.cwiseProduct(delta).sum();
        const double scale = std::max(std::abs(exact), 1e-3 * grad.norm() * delta.norm());
        EXPECT_LE(std::abs(fd - exact), 1e-6 * scale) << to_string(k);
      }
    }
  }
}

TEST(Evaluate, MidpointConcavity) {
  testing::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = testing::uniform_int(rng, 1, 5);
    const Matrix a = testing::random_psd(rng, n, 0.0, 4.0, 0.0);
    const Matrix b = testing::random_psd(rng, n, 0.0, 4.0, 0.0);
    for (MetricKind k : {MetricKind::kLogDet, MetricKind::kMinEig}) {
      const double mid = evaluate(spec(k), 0.5 * (a + b));
      EXPECT_GE(mid, 0.5 * (evaluate(spec(k), a) + evaluate(spec(k), b)) - 1e-12);
    }
  }
}

}  // namespace
}  // namespace sparsegram
