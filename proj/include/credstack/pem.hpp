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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace credstack {

struct CertificateInfo {
  std::string subject;  // RFC 2253
  std::string issuer;   // RFC 2253
  std::string serial_hex;
  std::int64_t not_before = 0;  // epoch seconds
  std::int64_t not_after = 0;

  bool operator==(const CertificateInfo&) const = default;
};

struct PemBlock {
  std::string label;  // e.g. "CERTIFICATE", "PRIVATE KEY"
  std::size_t der_size = 0;
  std::optional<CertificateInfo> certificate;  // set for CERTIFICATE blocks

  bool operator==(const PemBlock&) const = default;
};

// Summary of every PEM block in a credential string, in file order.
struct PemBundle {
  std::vector<PemBlock> blocks;

  // First CERTIFICATE block, if any.
  const CertificateInfo* leaf_certificate() const;

  bool operator==(const PemBundle&) const = default;
};

// Throws MalformedPem when the text holds no complete PEM block, a block is
// damaged, or a CERTIFICATE block is not valid DER.
PemBundle decode_pem_bundle(std::string_view text);

bool has_pem_armor(std::string_view text);

}  // namespace credstack
