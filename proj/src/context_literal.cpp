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

#include "credstack/context_literal.hpp"

#include <charconv>
#include <cstdint>

#include "credstack/error.hpp"
#include "utf8.hpp"

namespace credstack {
namespace {

constexpr int kMaxDepth = 64;

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view text) : text_(text) {}

  nlohmann::json parse_document() {
    skip_space();
    nlohmann::json value = parse_value(0);
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing characters");
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { fail_at(what, pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw ContextSyntaxError(what, at);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end()) {
      const char c = text_[pos_];
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') break;
      ++pos_;
    }
  }

  void expect(char c) {
    if (peek() != c) {
      fail(at_end() ? std::string("unexpected end of input, expected '") + c + "'"
                    : std::string("expected '") + c + "'");
    }
    ++pos_;
  }

  nlohmann::json parse_value(int depth) {
    if (depth > kMaxDepth) fail("nesting too deep");
    const char c = peek();
    if (c == '{') return parse_map(depth);
    if (c == '[') return parse_list(depth);
    if (c == '\'' || c == '"') return parse_string();
    if (c == '-' || c == '+' || (c >= '0' && c <= '9')) return parse_integer();
    if (at_end()) fail("unexpected end of input, expected a value");
    fail("expected a map, list, text or integer");
  }

  nlohmann::json parse_map(int depth) {
    expect('{');
    nlohmann::json map = nlohmann::json::object();
    skip_space();
    while (peek() != '}') {
      const char q = peek();
      if (q != '\'' && q != '"') {
        fail(at_end() ? "unexpected end of input in map" : "map keys must be text");
      }
      std::string key = parse_string();
      skip_space();
      expect(':');
      skip_space();
      map[key] = parse_value(depth + 1);
      skip_space();
      if (peek() == ',') {
        ++pos_;
        skip_space();
      } else if (peek() != '}') {
        fail(at_end() ? "unexpected end of input in map" : "expected ',' or '}'");
      }
    }
    ++pos_;
    return map;
  }

  nlohmann::json parse_list(int depth) {
    expect('[');
    nlohmann::json list = nlohmann::json::array();
    skip_space();
    while (peek() != ']') {
      list.push_back(parse_value(depth + 1));
      skip_space();
      if (peek() == ',') {
        ++pos_;
        skip_space();
      } else if (peek() != ']') {
        fail(at_end() ? "unexpected end of input in list" : "expected ',' or ']'");
      }
    }
    ++pos_;
    return list;
  }

  std::uint32_t parse_hex(std::size_t digits) {
    if (pos_ + digits > text_.size()) fail("truncated escape sequence");
    std::uint32_t value = 0;
    const auto* first = text_.data() + pos_;
    const auto [ptr, ec] = std::from_chars(first, first + digits, value, 16);
    if (ec != std::errc() || ptr != first + digits) fail("invalid hex escape");
    pos_ += digits;
    return value;
  }

  std::string parse_string() {
    const std::size_t start = pos_;
    const char quote = text_[pos_++];
    std::string out;
    for (;;) {
      if (at_end()) fail_at("unterminated string", start);
      const char c = text_[pos_];
      if (c == quote) {
        ++pos_;
        break;
      }
      if (c == '\n' || c == '\r') fail("line break inside string");
      if (c != '\\') {
        out.push_back(c);
        ++pos_;
        continue;
      }
      const std::size_t escape_at = pos_;
      ++pos_;
      if (at_end()) fail_at("unterminated string", start);
      const char e = text_[pos_++];
      switch (e) {
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        case '/': out.push_back('/'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case 'b': out.push_back('\b'); break;
        case 'f': out.push_back('\f'); break;
        case '0': out.push_back('\0'); break;
        case 'x': out.push_back(static_cast<char>(parse_hex(2))); break;
        case 'u': {
          std::uint32_t cp = parse_hex(4);
          if (cp >= 0xD800 && cp <= 0xDBFF) {
            if (text_.substr(pos_, 2) != "\\u") fail_at("unpaired surrogate", escape_at);
            pos_ += 2;
            const std::uint32_t low = parse_hex(4);
            if (low < 0xDC00 || low > 0xDFFF) fail_at("unpaired surrogate", escape_at);
            cp = 0x10000 + ((cp - 0xD800) << 10) + (low - 0xDC00);
          } else if (cp >= 0xDC00 && cp <= 0xDFFF) {
            fail_at("unpaired surrogate", escape_at);
          }
          detail::append_utf8(out, cp);
          break;
        }
        default: fail_at("unknown escape sequence", escape_at);
      }
    }
    if (!detail::is_valid_utf8(out)) fail_at("text is not valid UTF-8", start);
    return out;
  }

  nlohmann::json parse_integer() {
    const std::size_t start = pos_;
    bool negative = false;
    if (peek() == '+' || peek() == '-') {
      negative = peek() == '-';
      ++pos_;
    }
    const std::size_t digits_at = pos_;
    while (!at_end() && text_[pos_] >= '0' && text_[pos_] <= '9') ++pos_;
    if (pos_ == digits_at) fail("expected digits");
    if (!at_end() && (peek() == '.' || peek() == 'e' || peek() == 'E')) {
      fail_at("only integers are allowed", start);
    }
    const std::string_view digits = text_.substr(digits_at, pos_ - digits_at);
    if (digits.size() > 1 && digits.front() == '0') {
      fail_at("leading zeros are not allowed", start);
    }
    std::string literal(negative ? "-" : "");
    literal += digits;
    std::int64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(literal.data(), literal.data() + literal.size(), value);
    if (ec != std::errc() || ptr != literal.data() + literal.size()) {
      fail_at("integer out of range", start);
    }
    return value;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void quote_literal(const std::string& s, std::string& out) {
  static constexpr char kHex[] = "0123456789abcdef";
  out.push_back('\'');
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          out += "\\x";
          out.push_back(kHex[c >> 4]);
          out.push_back(kHex[c & 0xF]);
        } else {
          out.push_back(ch);
        }
    }
  }
  out.push_back('\'');
}

void render_literal(const nlohmann::json& value, std::string& out) {
  switch (value.type()) {
    case nlohmann::json::value_t::object: {
      out.push_back('{');
      bool first = true;
      for (const auto& [key, item] : value.items()) {
        if (!first) out += ", ";
        first = false;
        quote_literal(key, out);
        out += ": ";
        render_literal(item, out);
      }
      out.push_back('}');
      break;
    }
    case nlohmann::json::value_t::array: {
      out.push_back('[');
      bool first = true;
      for (const auto& item : value) {
        if (!first) out += ", ";
        first = false;
        render_literal(item, out);
      }
      out.push_back(']');
      break;
    }
    case nlohmann::json::value_t::string:
      quote_literal(value.get_ref<const std::string&>(), out);
      break;
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned:
      out += value.dump();
      break;
    default:
      throw std::invalid_argument("context literals hold only maps, lists, "
                                  "text and integers, not " +
                                  std::string(value.type_name()));
  }
}

}  // namespace

nlohmann::json parse_literal_value(std::string_view text) {
  return LiteralParser(text).parse_document();
}

GeneratorContext parse_context_literal(std::string_view text) {
  nlohmann::json value = parse_literal_value(text);
  if (!value.is_object()) throw ContextSyntaxError("context must be a map", 0);
  return GeneratorContext(std::move(value));
}

std::string to_context_literal(const nlohmann::json& value) {
  std::string out;
  render_literal(value, out);
  return out;
}

std::string to_context_json(const nlohmann::json& value) { return value.dump(); }

}  // namespace credstack
