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

#include <optional>
#include <string>
#include <string_view>

namespace credstack::base64url {

// Unpadded RFC 4648 section 5 encoding, as used by JWS compact serialization.
std::string encode(std::string_view bytes);

// Accepts unpadded or '='-padded input. Returns nullopt on any character
// outside the url-safe alphabet or an impossible length.
std::optional<std::string> decode(std::string_view text);

// True when every character belongs to the url-safe alphabet.
bool is_alphabet(std::string_view text);

}  // namespace credstack::base64url
