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
#ifndef SPARSEGRAM_ERROR_HPP
#define SPARSEGRAM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsegram {

enum class ErrorCode {
  kDimensionMismatch,
  kNonfiniteEntry,
  kNonpositiveHorizon,
  kInvalidBudget,
  kInvalidSchedule,
  kModeMismatch,
  kGridMismatch,
  kSingularGramian,
  kAsymmetricMatrix,
  kInvalidMetric,
  kInvalidOptions,
  kInstanceTooLarge,
  kInfeasibleInput,
  kConfigParse,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Exception type thrown by every sparsegram operation. The code lets callers
/// (and tests) distinguish failure classes without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the error-class prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sparsegram

#endif  // SPARSEGRAM_ERROR_HPP
