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

#pragma once

#include <cstddef>
#include <exception>
#include <string>

namespace credstack {

// Every error the library raises derives from Error. The message can be
// prefixed with location context while the exception propagates, so the
// concrete type survives a catch/annotate/rethrow.
class Error : public std::exception {
 public:
  explicit Error(std::string message) : message_(std::move(message)) {}

  const char* what() const noexcept override { return message_.c_str(); }
  const std::string& message() const noexcept { return message_; }

  // Prepends "<context>: " to the message.
  void add_context(const std::string& context);

 private:
  std::string message_;
};

#define CREDSTACK_DEFINE_ERROR(Name)                 \
  class Name : public Error {                        \
   public:                                           \
    explicit Name(std::string message)               \
        : Error(std::move(message)) {}               \
  }

// credential-core
CREDSTACK_DEFINE_ERROR(MalformedToken);
CREDSTACK_DEFINE_ERROR(EncodingError);
CREDSTACK_DEFINE_ERROR(MalformedPem);
CREDSTACK_DEFINE_ERROR(KindMismatch);
CREDSTACK_DEFINE_ERROR(IncompatibleKinds);
CREDSTACK_DEFINE_ERROR(NotAPair);
CREDSTACK_DEFINE_ERROR(UnrecognizedCredential);

// generators
CREDSTACK_DEFINE_ERROR(UnknownGenerator);
CREDSTACK_DEFINE_ERROR(InvalidContext);
CREDSTACK_DEFINE_ERROR(GeneratorError);
CREDSTACK_DEFINE_ERROR(CalloutNotFound);
CREDSTACK_DEFINE_ERROR(CalloutProtocolError);
CREDSTACK_DEFINE_ERROR(CalloutTimeout);

class CalloutFailed : public Error {
 public:
  CalloutFailed(int exit_code, std::string stderr_text);

  int exit_code() const noexcept { return exit_code_; }
  const std::string& stderr_text() const noexcept { return stderr_text_; }

 private:
  int exit_code_;
  std::string stderr_text_;
};

// parameters
CREDSTACK_DEFINE_ERROR(TypeCoercionError);

// config
CREDSTACK_DEFINE_ERROR(MarkupError);
CREDSTACK_DEFINE_ERROR(DeclError);
CREDSTACK_DEFINE_ERROR(ResolveError);

class ContextSyntaxError : public Error {
 public:
  ContextSyntaxError(std::string message, std::size_t offset);

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// lifecycle
CREDSTACK_DEFINE_ERROR(StorageError);
CREDSTACK_DEFINE_ERROR(NoRenewer);
CREDSTACK_DEFINE_ERROR(NotFound);
CREDSTACK_DEFINE_ERROR(RenewalRejected);

#undef CREDSTACK_DEFINE_ERROR

}  // namespace credstack
