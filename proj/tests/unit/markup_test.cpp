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

#include <gtest/gtest.h>

#include "credstack/error.hpp"

namespace {

using namespace credstack;

TEST(ParseMarkup, ElementsAttributesAndLocations) {
  const auto elements = parse_markup(
      "<?xml version=\"1.0\"?>\n"
      "<!-- frontend -->\n"
      "<frontend name='fe'>\n"
      "  <credential absfname=\"a\" purpose=\"payload\"/>\n"
      "  <group><parameter name='x' value='1'></parameter></group>\n"
      "</frontend>\n");
  ASSERT_EQ(elements.size(), 1u);
  const MarkupElement& root = elements[0];
  EXPECT_EQ(root.name, "frontend");
  EXPECT_EQ(root.location, (SourceLocation{3, 1}));
  ASSERT_EQ(root.children.size(), 2u);
  const MarkupElement& credential = root.children[0];
  EXPECT_EQ(credential.location, (SourceLocation{4, 3}));
  ASSERT_EQ(credential.attributes.size(), 2u);
  EXPECT_EQ(credential.attributes[0], (std::pair<std::string, std::string>{"absfname", "a"}));
  EXPECT_EQ(*credential.attribute("purpose"), "payload");
  EXPECT_EQ(credential.attribute("missing"), nullptr);
  EXPECT_EQ(root.children[1].children[0].name, "parameter");
}

TEST(ParseMarkup, SeveralTopLevelElements) {
  const auto elements = parse_markup("<a/>\n<b/>");
  ASSERT_EQ(elements.size(), 2u);
  EXPECT_EQ(elements[1].location.to_string(), "2:1");
}

TEST(ParseMarkup, EntitiesAndWhitespaceNormalization) {
  const auto elements =
      parse_markup("<e v=\"a&lt;b&amp;&quot;&#65;&#x42;\" w=\"x\n\ty\r\nz\"/>");
  EXPECT_EQ(*elements[0].attribute("v"), "a<b&\"AB");
  EXPECT_EQ(*elements[0].attribute("w"), "x  y z");
}

TEST(ParseMarkup, SkipsCdataDoctypeAndText) {
  const auto elements = parse_markup(
      "<!DOCTYPE frontend>\n<r>text<![CDATA[<not-an-element/>]]><?pi x?><c/></r>");
  ASSERT_EQ(elements.size(), 1u);
  ASSERT_EQ(elements[0].children.size(), 1u);
  EXPECT_EQ(elements[0].children[0].name, "c");
}

TEST(ParseMarkup, ErrorsNameLineAndColumn) {
  struct Case {
    const char* text;
    const char* prefix;
  };
  for (const Case c : {Case{"<a>\n</b>", "2:"}, Case{"<a x='1' x='2'/>", "1:"},
                       Case{"<a x=1/>", "1:"}, Case{"<a>", "1:"}, Case{"<a x='&bogus;'/>", "1:"},
                       Case{"\n\n  <a x='<'/>", "3:"}, Case{"<!-- open", "1:"}}) {
    try {
      parse_markup(c.text);
      ADD_FAILURE() << "accepted " << c.text;
    } catch (const MarkupError& e) {
      EXPECT_EQ(std::string(e.what()).rfind(c.prefix, 0), 0u) << c.text << " -> " << e.what();
    }
  }
}

TEST(EscapeAttribute, RoundTrips) {
  const std::string raw = "a<b>&\"c'";
  const auto elements = parse_markup("<e v=\"" + escape_attribute(raw) + "\"/>");
  EXPECT_EQ(*elements[0].attribute("v"), raw);
}

}  // namespace
