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
#include "sparsegram/error.hpp"

namespace sparsegram {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kNonfiniteEntry: return "nonfinite entry";
    case ErrorCode::kNonpositiveHorizon: return "nonpositive horizon";
    case ErrorCode::kInvalidBudget: return "invalid budget";
    case ErrorCode::kInvalidSchedule: return "invalid schedule";
    case ErrorCode::kModeMismatch: return "mode mismatch";
    case ErrorCode::kGridMismatch: return "grid mismatch";
    case ErrorCode::kSingularGramian: return "singular gramian";
    case ErrorCode::kAsymmetricMatrix: return "asymmetric matrix";
    case ErrorCode::kInvalidMetric: return "invalid metric";
    case ErrorCode::kInvalidOptions: return "invalid options";
    case ErrorCode::kInstanceTooLarge: return "instance too large";
    case ErrorCode::kInfeasibleInput: return "infeasible input";
    case ErrorCode::kConfigParse: return "config parse error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace sparsegram
