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

// Callout wire protocol.
//
// The executable is started with no payload arguments. It receives exactly
// one UTF-8 JSON object on stdin, then end-of-stream:
//
//   {"context": {...}, "kwargs": {...},
//    "args": {"site_name": ..., "trust_domain": ..., "purpose": ...}}
//
// and must print one JSON object on stdout and exit 0:
//
//   {"type": "<context type>", "value": "<text>", "expiry": <int, optional>}
//
// A nonzero exit is a failure; stderr is reported verbatim.

#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "credstack/generators.hpp"
#include "json.hpp"

namespace credstack {

struct CalloutInvocation {
  std::filesystem::path executable;
  std::filesystem::path plugin_dir;
  nlohmann::json context = nlohmann::json::object();
  nlohmann::json kwargs = nlohmann::json::object();
  RuntimeArgs args;
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
};

// Absolute paths are used as-is; anything else is looked up in plugin_dir.
// Throws CalloutNotFound unless the result is an executable regular file.
std::filesystem::path resolve_callout(const std::filesystem::path& executable,
                                      const std::filesystem::path& plugin_dir);

// The stdin document. kwargs are the invocation kwargs overlaid with
// args.extra().
nlohmann::json callout_request(const CalloutInvocation& invocation);

// Throws CalloutNotFound, CalloutFailed, CalloutProtocolError,
// CalloutTimeout, or InvalidContext when the context has no "type".
GeneratedValue run_callout(const CalloutInvocation& invocation);

}  // namespace credstack
