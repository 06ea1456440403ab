// Copyright 2026 The credstack Authors
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

#include "credstack/error.hpp"

namespace credstack {

void Error::add_context(const std::string& context) {
  message_ = context + ": " + message_;
}

CalloutFailed::CalloutFailed(int exit_code, std::string stderr_text)
    : Error("callout exited with status " + std::to_string(exit_code) +
            (stderr_text.empty() ? std::string() : ": " + stderr_text)),
      exit_code_(exit_code),
      stderr_text_(std::move(stderr_text)) {}

ContextSyntaxError::ContextSyntaxError(std::string message, std::size_t offset)
    : Error(std::move(message) + " at offset " + std::to_string(offset)),
      offset_(offset) {}

}  // namespace credstack
