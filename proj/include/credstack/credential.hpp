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

// Credential data model.
//
// A Credential stores exactly one thing of substance: its raw string. Every
// other attribute (claims, subject, scope, expiry, certificate fields) is
// decoded from that string on each access, so there is no cached state that
// could drift from the string. Renewal never mutates a Credential; it builds
// a new one with with_string().

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "credstack/pem.hpp"
#include "json.hpp"

namespace credstack {

using EpochSeconds = std::int64_t;

enum class CredentialKind {
  Generic,
  Token,
  IdToken,
  SciToken,
  X509Cert,
  X509Pair,
  SshKeyPair,
};

std::string_view to_string(CredentialKind kind);
// Accepts the names produced by to_string plus lower-case aliases
// ("scitoken", "idtoken", "token", "jwt", "x509", "generic", ...).
std::optional<CredentialKind> kind_from_string(std::string_view name);

bool is_token_kind(CredentialKind kind);
bool is_pair_kind(CredentialKind kind);
// The kind a pair behaves as: X509Pair -> X509Cert, SshKeyPair -> Generic.
CredentialKind public_kind_of(CredentialKind kind);
// Extension (with leading dot) used when a credential of this kind is
// written to disk.
std::string_view canonical_extension(CredentialKind kind);

struct ExtensionRule {
  std::string_view extension;
  CredentialKind kind;
};

// Lookup table used by classify_file. ".pub" names the public half of an
// SSH key pair whose private half is the extensionless sibling.
std::span<const ExtensionRule> extension_table();

enum class Purpose { Request, Payload, Callback };

std::string_view to_string(Purpose purpose);
std::optional<Purpose> purpose_from_string(std::string_view name);
// "P-CRED", "S-CRED" or "C-CRED".
std::string_view credential_class(Purpose purpose);

struct Source {
  enum class Type { File, Generator, Literal };

  Type type = Type::Literal;
  std::string descriptor;

  static Source file(std::filesystem::path path);
  static Source generator(std::string name);
  static Source literal(std::string label = {});

  bool operator==(const Source&) const = default;
};

std::string_view to_string(Source::Type type);

struct CredentialMetadata {
  std::optional<Purpose> purpose;
  std::optional<std::string> trust_domain;
  std::optional<std::string> security_class;
  Source source;

  bool operator==(const CredentialMetadata&) const = default;
};

class CredentialPair;

class Credential {
 public:
  Credential() = default;
  // Pair kinds are rejected here (IncompatibleKinds); build them with
  // make_pair.
  Credential(std::optional<std::string> string, CredentialKind kind,
             CredentialMetadata metadata = {});

  const std::optional<std::string>& string() const { return string_; }
  bool empty() const { return !string_ || string_->empty(); }
  CredentialKind kind() const { return kind_; }
  const CredentialMetadata& metadata() const { return metadata_; }
  const std::optional<Purpose>& purpose() const { return metadata_.purpose; }
  const std::optional<std::string>& trust_domain() const {
    return metadata_.trust_domain;
  }
  const std::optional<std::string>& security_class() const {
    return metadata_.security_class;
  }
  const Source& source() const { return metadata_.source; }

  bool is_pair() const { return private_ != nullptr; }

  // Same kind, metadata and private half; new raw string.
  Credential with_string(std::optional<std::string> string) const;
  Credential with_metadata(CredentialMetadata metadata) const;

  bool operator==(const Credential& other) const;

 private:
  friend class CredentialPair;
  friend const Credential& private_of(const Credential& credential);

  std::optional<std::string> string_;
  CredentialKind kind_ = CredentialKind::Generic;
  CredentialMetadata metadata_;
  std::shared_ptr<const Credential> private_;
};

// A public credential that also carries its private counterpart. A pair is a
// Credential: every operation on the public kind accepts it and acts on the
// public half.
class CredentialPair : public Credential {
 public:
  // The public half as a plain credential of the public kind.
  Credential public_part() const;
  const Credential& private_credential() const { return *private_; }

  // Recovers the pair view of a credential built by make_pair.
  static CredentialPair from(const Credential& credential);

 private:
  CredentialPair(const Credential& public_credential,
                 const Credential& private_credential, CredentialKind kind);
  explicit CredentialPair(const Credential& pair) : Credential(pair) {}

  friend CredentialPair make_pair(const Credential&, const Credential&);
};

// (X509Cert, X509Cert) -> X509Pair; (Generic, Generic) -> SshKeyPair.
// Anything else throws IncompatibleKinds.
CredentialPair make_pair(const Credential& public_credential,
                         const Credential& private_credential);

// Throws NotAPair for plain credentials.
const Credential& private_of(const Credential& credential);

// Decoded JWT claim set. Accessors return nullopt for missing claims.
class TokenClaims {
 public:
  TokenClaims() : claims_(nlohmann::json::object()) {}
  // Throws MalformedToken unless `claims` is an object with well-formed
  // numeric time claims.
  explicit TokenClaims(nlohmann::json claims);

  const nlohmann::json& claims() const { return claims_; }
  bool contains(std::string_view name) const;
  // Text claims. Non-string values are returned as their JSON text; an "aud"
  // array is joined with single spaces.
  std::optional<std::string> text(std::string_view name) const;
  // Numeric time claims normalized to whole seconds.
  std::optional<EpochSeconds> seconds(std::string_view name) const;

  std::optional<std::string> sub() const { return text("sub"); }
  std::optional<std::string> scope() const { return text("scope"); }
  std::optional<std::string> iss() const { return text("iss"); }
  std::optional<std::string> aud() const { return text("aud"); }
  std::optional<std::string> jti() const { return text("jti"); }
  std::optional<EpochSeconds> exp() const { return seconds("exp"); }
  std::optional<EpochSeconds> nbf() const { return seconds("nbf"); }
  std::optional<EpochSeconds> iat() const { return seconds("iat"); }

  bool operator==(const TokenClaims&) const = default;

 private:
  nlohmann::json claims_;
};

struct OpaqueBlob {
  std::string bytes;
  bool operator==(const OpaqueBlob&) const = default;
};

using Payload = std::variant<TokenClaims, PemBundle, OpaqueBlob>;

// Structural JWT decode: whitespace is stripped, the three compact segments
// are split and the payload segment is parsed as a JSON object. The
// signature is not checked. Throws EncodingError for invalid UTF-8 and
// MalformedToken for anything that is not a JWT.
TokenClaims decode_token(std::string_view raw);

// nullopt for an absent or empty string; otherwise the kind-specific decode.
std::optional<Payload> payload(const Credential& credential);

// Token kinds only (KindMismatch otherwise).
std::optional<std::string> subject(const Credential& credential);
std::optional<std::string> scope(const Credential& credential);
std::optional<std::string> issuer(const Credential& credential);

// Expiry of tokens (exp claim) and certificates (notAfter). nullopt when the
// credential carries none or does not decode.
std::optional<EpochSeconds> expiry(const Credential& credential);

struct ValidityReport {
  bool structurally_valid = false;
  bool not_expired = false;
  bool not_before_ok = false;
  std::optional<std::int64_t> seconds_remaining;
  std::vector<std::string> problems;

  bool ok() const { return structurally_valid && not_expired && not_before_ok; }
  bool operator==(const ValidityReport&) const = default;
};

// Never throws; every problem lands in the report.
ValidityReport validate(const Credential& credential, EpochSeconds now);

// Extension first (see extension_table), then content sniffing: three
// base64url segments -> Token, PEM armor -> X509Cert. Throws
// UnrecognizedCredential when nothing matches.
CredentialKind classify_file(const std::filesystem::path& path,
                             std::string_view contents);

// Reads and classifies a credential file. A ".pub" file is paired with its
// extensionless sibling; a ".crt" file with a sibling ".key", when present,
// becomes an X509Pair. Throws StorageError when unreadable.
Credential load_credential_file(const std::filesystem::path& path,
                                CredentialMetadata metadata = {});

std::string read_file(const std::filesystem::path& path);

}  // namespace credstack
