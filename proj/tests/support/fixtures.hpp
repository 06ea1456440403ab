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

// Shared test fixtures: scratch directories, shell callout scripts and
// freshly minted X.509 material.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace fixtures {

// Creates a unique directory under $TMPDIR and removes it on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(std::string_view name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path write_file(const std::filesystem::path& path,
                                 std::string_view contents);

// Writes `body` after a "#!/bin/sh" line and marks the file executable.
std::filesystem::path write_script(const std::filesystem::path& path,
                                   std::string_view body);

std::string read_text(const std::filesystem::path& path);

// Permission bits (st_mode & 07777).
unsigned mode_of(const std::filesystem::path& path);

struct X509Material {
  std::string certificate_pem;
  std::string private_key_pem;
};

// Self-signed P-256 certificate valid over [not_before, not_after].
X509Material make_certificate(const std::string& common_name, std::int64_t not_before,
                              std::int64_t not_after, long serial = 1);

}  // namespace fixtures
