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

#include "credstack/parameters.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

#include "credstack/error.hpp"

namespace credstack {

std::string_view to_string(ParameterType type) {
  switch (type) {
    case ParameterType::Integer: return "integer";
    case ParameterType::String: return "string";
    case ParameterType::Expression: return "expression";
  }
  return "string";
}

std::optional<ParameterType> parameter_type_from_string(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (key == "integer" || key == "int") return ParameterType::Integer;
  if (key == "string" || key == "text") return ParameterType::String;
  if (key == "expression" || key == "expr") return ParameterType::Expression;
  return std::nullopt;
}

Parameter Parameter::literal(std::string name, ParameterType type,
                             std::string value) {
  Parameter p(std::move(name), type);
  p.literal_ = std::move(value);
  return p;
}

Parameter Parameter::generated(std::string name, ParameterType type,
                               std::shared_ptr<GeneratorHandle> generator) {
  if (!generator) throw std::invalid_argument("parameter generator is null");
  Parameter p(std::move(name), type);
  p.generator_ = std::move(generator);
  return p;
}

std::int64_t parse_integer(std::string_view text) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  std::string_view s = text;
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  const bool explicit_plus = !s.empty() && s.front() == '+';
  if (explicit_plus) s.remove_prefix(1);
  if (s.empty() || (explicit_plus && s.front() == '-')) {
    throw TypeCoercionError("'" + std::string(text) + "' is not an integer");
  }

  std::int64_t value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value, 10);
  if (ec == std::errc::result_out_of_range) {
    throw TypeCoercionError("'" + std::string(text) + "' is out of integer range");
  }
  if (ec != std::errc() || ptr != end) {
    throw TypeCoercionError("'" + std::string(text) + "' is not an integer");
  }
  return value;
}

ParameterValue coerce(std::string_view text, ParameterType type) {
  switch (type) {
    case ParameterType::Integer: return parse_integer(text);
    case ParameterType::String: return std::string(text);
    case ParameterType::Expression: return Expression{std::string(text)};
  }
  return std::string(text);
}

ParameterValue resolve_parameter(const Parameter& parameter,
                                 const RuntimeArgs& args) {
  try {
    if (parameter.is_generated()) {
      return coerce(parameter.generator()->generate(args).value, parameter.type());
    }
    return coerce(*parameter.literal_text(), parameter.type());
  } catch (Error& e) {
    e.add_context("parameter " + parameter.name());
    throw;
  }
}

std::string to_text(const ParameterValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return std::get<Expression>(value).text;
}

}  // namespace credstack
