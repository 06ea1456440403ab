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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "credstack/generators.hpp"

namespace credstack {

enum class ParameterType { Integer, String, Expression };

std::string_view to_string(ParameterType type);
// "integer"/"int", "string"/"text", "expression"/"expr" (case-insensitive).
std::optional<ParameterType> parameter_type_from_string(std::string_view name);

// Expressions are carried as opaque text and never evaluated here.
struct Expression {
  std::string text;
  bool operator==(const Expression&) const = default;
};

using ParameterValue = std::variant<std::int64_t, std::string, Expression>;

// A security parameter with either a literal value or a generator behind it.
// Generator-backed parameters share their handle; resolving advances the
// generator's state, so resolution of one parameter must be serialized.
class Parameter {
 public:
  static Parameter literal(std::string name, ParameterType type,
                           std::string value);
  static Parameter generated(std::string name, ParameterType type,
                             std::shared_ptr<GeneratorHandle> generator);

  const std::string& name() const { return name_; }
  ParameterType type() const { return type_; }
  bool is_generated() const { return generator_ != nullptr; }
  const std::optional<std::string>& literal_text() const { return literal_; }
  const std::shared_ptr<GeneratorHandle>& generator() const { return generator_; }

 private:
  Parameter(std::string name, ParameterType type) : name_(std::move(name)), type_(type) {}

  std::string name_;
  ParameterType type_;
  std::optional<std::string> literal_;
  std::shared_ptr<GeneratorHandle> generator_;
};

// Base-10 with optional sign and surrounding whitespace. Throws
// TypeCoercionError otherwise, including on overflow.
std::int64_t parse_integer(std::string_view text);

ParameterValue coerce(std::string_view text, ParameterType type);

// Literal parameters resolve to their value every time; generated ones call
// the generator on every resolve (no caching).
ParameterValue resolve_parameter(const Parameter& parameter,
                                 const RuntimeArgs& args);

std::string to_text(const ParameterValue& value);

}  // namespace credstack
