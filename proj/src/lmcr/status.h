// Copyright 2026 The LMCR Authors.
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

#ifndef LMCR_STATUS_H_
#define LMCR_STATUS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmcr {

// Failure categories shared by every module. The numeric values are part of
// the C API (see lmcr.h) and must stay stable.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kEmptyText = 2,
  kInvalidOrder = 3,
  kEmptyCorpus = 4,
  kParseError = 5,
  kSchemaError = 6,
  kDuplicateId = 7,
  kFormatError = 8,
  kUnavailable = 9,
  kProtocolError = 10,
  kConfigError = 11,
  kEmptySuffix = 12,
  kEmptyDataset = 13,
  kIoError = 14,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace lmcr

#endif  // LMCR_STATUS_H_
