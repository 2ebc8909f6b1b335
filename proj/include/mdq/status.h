// Copyright 2026 The MDQ Authors. All Rights Reserved.
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

#ifndef MDQ_STATUS_H_
#define MDQ_STATUS_H_

#include <stdexcept>
#include <string>

namespace mdq {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kBadMagic,
  kBadVersion,
  kTruncated,
  kCorrupt,
  kModelMismatch,
  kIo,
  kNonFinite,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. what() is a
// single line prefixed with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Check(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace mdq

#endif  // MDQ_STATUS_H_
