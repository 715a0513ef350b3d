// Copyright 2026 The Koopmanix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KOOPMANIX_ERROR_HPP
#define KOOPMANIX_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace koopmanix {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kLayoutMismatch,
  kNonFinite,
  kEmptyInput,
  kFitFailure,
  kMalformedFile,
  kSchemaMismatch,
  kIo,
  kUnsupported,
};

// Stable identifier used in machine-readable error lines.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a NaN/Inf appears during a time-stepped computation. `step` is
// the 1-based time index of the first offending value.
class NonFiniteError : public Error {
 public:
  NonFiniteError(int step, const std::string& what)
      : Error(ErrorCode::kNonFinite, what), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace koopmanix

#endif  // KOOPMANIX_ERROR_HPP
