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

#include "credstack/markup.hpp"

#include <charconv>
#include <cstdint>
#include <optional>

#include "credstack/error.hpp"
#include "utf8.hpp"

namespace credstack {
namespace {

constexpr int kMaxDepth = 128;

bool is_name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == ':' || static_cast<unsigned char>(c) >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class MarkupReader {
 public:
  explicit MarkupReader(std::string_view text) : text_(text) {}

  std::vector<MarkupElement> read_document() {
    std::vector<MarkupElement> top;
    for (;;) {
      skip_text();
      if (at_end()) break;
      if (starts_with("</")) fail("closing tag without an open element");
      if (auto element = read_node(0)) top.push_back(std::move(*element));
    }
    return top;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, location()); }
  [[noreturn]] void fail_at(const std::string& what, SourceLocation where) const {
    throw MarkupError(where.to_string() + ": " + what);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_, s.size()) == s; }

  SourceLocation location() const { return location_at(pos_); }
  SourceLocation location_at(std::size_t offset) const {
    SourceLocation loc;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++loc.line;
        loc.column = 1;
      } else {
        ++loc.column;
      }
    }
    return loc;
  }

  void skip_space() {
    while (!at_end() && is_space(text_[pos_])) ++pos_;
  }

  // Character data between tags is not used by the configuration model.
  void skip_text() {
    while (!at_end() && text_[pos_] != '<') ++pos_;
  }

  void skip_past(std::string_view terminator, const char* construct) {
    const auto end = text_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + construct);
    pos_ = end + terminator.size();
  }

  std::string read_name() {
    if (!is_name_start(peek())) fail("expected a name");
    const std::size_t start = pos_;
    while (!at_end() && is_name_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }

  // Returns nullopt for comments, processing instructions, CDATA, DOCTYPE.
  std::optional<MarkupElement> read_node(int depth) {
    if (starts_with("<!--")) {
      skip_past("-->", "comment");
      return std::nullopt;
    }
    if (starts_with("<?")) {
      skip_past("?>", "processing instruction");
      return std::nullopt;
    }
    if (starts_with("<![CDATA[")) {
      skip_past("]]>", "CDATA section");
      return std::nullopt;
    }
    if (starts_with("<!")) {
      skip_doctype();
      return std::nullopt;
    }
    return read_element(depth);
  }

  void skip_doctype() {
    int brackets = 0;
    while (!at_end()) {
      const char c = text_[pos_++];
      if (c == '[') ++brackets;
      if (c == ']') --brackets;
      if (c == '>' && brackets <= 0) return;
    }
    fail("unterminated declaration");
  }

  MarkupElement read_element(int depth) {
    if (depth > kMaxDepth) fail("elements nested too deeply");
    MarkupElement element;
    element.location = location();
    ++pos_;  // '<'
    element.name = read_name();

    for (;;) {
      const bool had_space = !at_end() && is_space(peek());
      skip_space();
      if (at_end()) fail_at("unterminated tag <" + element.name + ">", element.location);
      if (starts_with("/>")) {
        pos_ += 2;
        return element;
      }
      if (peek() == '>') {
        ++pos_;
        break;
      }
      if (!had_space) fail("expected whitespace between attributes");
      read_attribute(element);
    }

    for (;;) {
      skip_text();
      if (at_end()) fail_at("element <" + element.name + "> is never closed", element.location);
      if (starts_with("</")) {
        pos_ += 2;
        const auto close_at = location();
        const std::string name = read_name();
        skip_space();
        if (peek() != '>') fail("expected '>' in closing tag");
        ++pos_;
        if (name != element.name) {
          fail_at("closing tag </" + name + "> does not match <" + element.name +
                      "> opened at " + element.location.to_string(),
                  close_at);
        }
        return element;
      }
      if (auto child = read_node(depth + 1)) element.children.push_back(std::move(*child));
    }
  }

  void read_attribute(MarkupElement& element) {
    const auto at = location();
    std::string name = read_name();
    skip_space();
    if (peek() != '=') fail("expected '=' after attribute " + name);
    ++pos_;
    skip_space();
    const char quote = peek();
    if (quote != '"' && quote != '\'') fail("attribute value must be quoted");
    ++pos_;
    std::string value;
    for (;;) {
      if (at_end()) fail_at("unterminated value of attribute " + name, at);
      const char c = text_[pos_];
      if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '<') fail("'<' is not allowed in attribute values");
      if (c == '&') {
        read_reference(value);
        continue;
      }
      if (c == '\r') {
        // CR LF and lone CR both normalize to a single space.
        value.push_back(' ');
        ++pos_;
        if (peek() == '\n') ++pos_;
        continue;
      }
      value.push_back(c == '\t' || c == '\n' ? ' ' : c);
      ++pos_;
    }
    if (!detail::is_valid_utf8(value)) fail_at("attribute " + name + " is not valid UTF-8", at);
    if (element.attribute(name)) fail_at("duplicate attribute " + name, at);
    element.attributes.emplace_back(std::move(name), std::move(value));
  }

  void read_reference(std::string& out) {
    const auto at = location();
    const auto end = text_.find(';', pos_);
    if (end == std::string_view::npos || end - pos_ > 12) {
      fail_at("unterminated entity reference", at);
    }
    const std::string_view ref = text_.substr(pos_ + 1, end - pos_ - 1);
    pos_ = end + 1;
    if (ref == "lt") return out.push_back('<');
    if (ref == "gt") return out.push_back('>');
    if (ref == "amp") return out.push_back('&');
    if (ref == "quot") return out.push_back('"');
    if (ref == "apos") return out.push_back('\'');
    if (ref.size() > 1 && ref[0] == '#') {
      const bool hex = ref[1] == 'x';
      const std::string_view digits = ref.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                             cp, hex ? 16 : 10);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() &&
          cp != 0 && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF)) {
        detail::append_utf8(out, cp);
        return;
      }
    }
    fail_at("unknown entity reference &" + std::string(ref) + ";", at);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string SourceLocation::to_string() const {
  return std::to_string(line) + ":" + std::to_string(column);
}

const std::string* MarkupElement::attribute(std::string_view name) const {
  for (const auto& [key, value] : attributes) {
    if (key == name) return &value;
  }
  return nullptr;
}

std::vector<MarkupElement> parse_markup(std::string_view text) {
  return MarkupReader(text).read_document();
}

std::string escape_attribute(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (const char c : value) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      case '\n': out += "&#10;"; break;
      case '\t': out += "&#9;"; break;
      case '\r': out += "&#13;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace credstack
