// Copyright 2026 The LCMR Authors
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
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lcmr {

// Error categories. The CLI prints the category verbatim so scripts can match
// on it.
enum class ErrorKind {
  kInvalidArgument,
  kIndex,
  kState,
  kParse,
  kFormat,
  kConfig,
  kIo,
  kNumeric,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

// Warnings go through a replaceable sink; the default writes to stderr.
using WarningSink = void (*)(std::string_view);
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace lcmr
