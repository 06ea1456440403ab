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

// Minimal XML reader for configuration documents: elements, attributes,
// comments, processing instructions, CDATA and DOCTYPE (the last three are
// skipped). Character data is ignored. Several top-level elements are
// accepted, as if wrapped in an implicit root.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace credstack {

struct SourceLocation {
  std::size_t line = 1;
  std::size_t column = 1;

  std::string to_string() const;
  bool operator==(const SourceLocation&) const = default;
};

struct MarkupElement {
  std::string name;
  // Document order. Values are entity-decoded and whitespace-normalized
  // (tab, CR, LF -> space) as XML attribute values are.
  std::vector<std::pair<std::string, std::string>> attributes;
  SourceLocation location;
  std::vector<MarkupElement> children;

  const std::string* attribute(std::string_view name) const;
};

// Throws MarkupError("<line>:<column>: ...") for malformed documents.
std::vector<MarkupElement> parse_markup(std::string_view text);

// Escapes &, <, >, " and ' for use inside a double-quoted attribute.
std::string escape_attribute(std::string_view value);

}  // namespace credstack
