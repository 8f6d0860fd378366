// Copyright 2026 The ScanOracle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef SCANORACLE_ERROR_H_
#define SCANORACLE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace scanoracle {

enum class ErrorCode {
  kOk = 0,
  kZeroDivisor,
  kEmptyScanSet,
  kIndexOutOfRange,
  kIo,
  kFormatError,
  kInvalidArgument,
  kNotZMap,
  kDegenerateInput,
  kIncompatibleOffset,
  kDuplicateAddress,
  kObservationBlacklisted,
  kTooShort,
  kBudgetExceeded,
  kRequiresSuccess,
  kZeroDuration,
};

std::string_view error_code_name(ErrorCode code);

// Thrown by the non-detection modules. Detectors report failures through
// DetectionResult::status instead, since failing hypotheses are the common
// case there.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scanoracle

#endif  // SCANORACLE_ERROR_H_
