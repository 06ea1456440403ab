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

// Context literals, as written in configuration attributes:
//
//   {'items': ['str1', 'str2', 'str3'], 'type': 'text'}
//   {"items": ["str1", "str2", "str3"], "type": "text"}
//
// Both quote styles (and a mix of them) are accepted. The value grammar is
// limited to maps with text keys, lists, text and base-10 integers; trailing
// commas are allowed. Booleans, null, floats and anything else are syntax
// errors. Parsed values are nlohmann::json, whose ordered-key objects serve
// as the canonical form for comparisons.

#pragma once

#include <string>
#include <string_view>

#include "credstack/generators.hpp"
#include "json.hpp"

namespace credstack {

// Parses any value of the grammar. Throws ContextSyntaxError with the byte
// offset of the first offending character.
nlohmann::json parse_literal_value(std::string_view text);

// Parses a top-level map and checks the "type" key (InvalidContext).
GeneratorContext parse_context_literal(std::string_view text);

// Single-quoted rendering: {'items': ['a', 'b'], 'type': 'text'}.
std::string to_context_literal(const nlohmann::json& value);

// Compact JSON rendering.
std::string to_context_json(const nlohmann::json& value);

}  // namespace credstack
