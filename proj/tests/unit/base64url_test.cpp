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

#include "credstack/base64url.hpp"

#include <gtest/gtest.h>

#include <random>

#include "jwt_oracle.hpp"

namespace {

using namespace credstack;

TEST(Base64Url, KnownVectors) {
  EXPECT_EQ(base64url::encode(""), "");
  EXPECT_EQ(base64url::encode("f"), "Zg");
  EXPECT_EQ(base64url::encode("foob"), "Zm9vYg");
  EXPECT_EQ(base64url::encode("\xfb\xef\xff"), "--__");
}

TEST(Base64Url, AcceptsPaddedInput) {
  EXPECT_EQ(base64url::decode("Zg=="), "f");
  EXPECT_EQ(base64url::decode("Zm8="), "fo");
  EXPECT_EQ(base64url::decode("Zm8"), "fo");
}

TEST(Base64Url, RejectsForeignCharactersAndBadLengths) {
  EXPECT_FALSE(base64url::decode("Zm9v+g").has_value());
  EXPECT_FALSE(base64url::decode("Zm9v/g").has_value());
  EXPECT_FALSE(base64url::decode("Zm9vY").has_value());
  EXPECT_FALSE(base64url::decode("Z=g").has_value());
  EXPECT_FALSE(base64url::is_alphabet("abc.def"));
  EXPECT_TRUE(base64url::is_alphabet("abc-_09"));
}

TEST(Base64Url, AgreesWithOracleOnRandomBytes) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int length = 0; length < 200; ++length) {
    std::string bytes;
    for (int i = 0; i < length; ++i) bytes += static_cast<char>(byte(rng));
    const std::string encoded = base64url::encode(bytes);
    ASSERT_EQ(encoded, oracle::b64url_encode(bytes)) << "length " << length;
    ASSERT_EQ(base64url::decode(encoded), bytes);
  }
}

}  // namespace
