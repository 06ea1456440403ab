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

#include "credstack/credential.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "credstack/base64url.hpp"
#include "credstack/error.hpp"
#include "utf8.hpp"

namespace credstack {
namespace {

constexpr std::array<ExtensionRule, 7> kExtensionTable{{
    {".idtoken", CredentialKind::IdToken},
    {".scitoken", CredentialKind::SciToken},
    {".jwt", CredentialKind::Token},
    {".pem", CredentialKind::X509Cert},
    {".crt", CredentialKind::X509Cert},
    {".pub", CredentialKind::SshKeyPair},
    {".cred", CredentialKind::Generic},
}};

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view strip(std::string_view s) {
  const auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string_view> split_dots(std::string_view s) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = s.find('.', start);
    if (dot == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, dot - start));
    start = dot + 1;
  }
}

nlohmann::json parse_segment(std::string_view segment, const char* what) {
  auto bytes = base64url::decode(segment);
  if (!bytes) {
    throw MalformedToken(std::string(what) + " segment is not base64url");
  }
  auto parsed = nlohmann::json::parse(*bytes, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw MalformedToken(std::string(what) + " segment is not a JSON object");
  }
  return parsed;
}

void require_token_kind(const Credential& credential, const char* accessor) {
  if (!is_token_kind(public_kind_of(credential.kind()))) {
    throw KindMismatch(std::string(accessor) + " is only defined for token "
                       "credentials, not " +
                       std::string(to_string(credential.kind())));
  }
}

const TokenClaims* claims_of(const std::optional<Payload>& p) {
  return p ? std::get_if<TokenClaims>(&*p) : nullptr;
}

}  // namespace

std::string_view to_string(CredentialKind kind) {
  switch (kind) {
    case CredentialKind::Generic: return "Generic";
    case CredentialKind::Token: return "Token";
    case CredentialKind::IdToken: return "IdToken";
    case CredentialKind::SciToken: return "SciToken";
    case CredentialKind::X509Cert: return "X509Cert";
    case CredentialKind::X509Pair: return "X509Pair";
    case CredentialKind::SshKeyPair: return "SshKeyPair";
  }
  return "Generic";
}

std::optional<CredentialKind> kind_from_string(std::string_view name) {
  const std::string key = lower(name);
  if (key == "generic" || key == "text" || key == "string") {
    return CredentialKind::Generic;
  }
  if (key == "token" || key == "jwt") return CredentialKind::Token;
  if (key == "idtoken" || key == "id_token") return CredentialKind::IdToken;
  if (key == "scitoken") return CredentialKind::SciToken;
  if (key == "x509cert" || key == "x509_cert" || key == "x509") {
    return CredentialKind::X509Cert;
  }
  if (key == "x509pair" || key == "x509_pair") return CredentialKind::X509Pair;
  if (key == "sshkeypair" || key == "ssh_key_pair" || key == "ssh") {
    return CredentialKind::SshKeyPair;
  }
  return std::nullopt;
}

bool is_token_kind(CredentialKind kind) {
  return kind == CredentialKind::Token || kind == CredentialKind::IdToken ||
         kind == CredentialKind::SciToken;
}

bool is_pair_kind(CredentialKind kind) {
  return kind == CredentialKind::X509Pair || kind == CredentialKind::SshKeyPair;
}

CredentialKind public_kind_of(CredentialKind kind) {
  switch (kind) {
    case CredentialKind::X509Pair: return CredentialKind::X509Cert;
    case CredentialKind::SshKeyPair: return CredentialKind::Generic;
    default: return kind;
  }
}

std::string_view canonical_extension(CredentialKind kind) {
  switch (kind) {
    case CredentialKind::Generic: return ".cred";
    case CredentialKind::Token: return ".jwt";
    case CredentialKind::IdToken: return ".idtoken";
    case CredentialKind::SciToken: return ".scitoken";
    case CredentialKind::X509Cert: return ".pem";
    case CredentialKind::X509Pair: return ".crt";
    case CredentialKind::SshKeyPair: return ".pub";
  }
  return ".cred";
}

std::span<const ExtensionRule> extension_table() { return kExtensionTable; }

std::string_view to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::Request: return "request";
    case Purpose::Payload: return "payload";
    case Purpose::Callback: return "callback";
  }
  return "request";
}

std::optional<Purpose> purpose_from_string(std::string_view name) {
  if (name == "request") return Purpose::Request;
  if (name == "payload") return Purpose::Payload;
  if (name == "callback") return Purpose::Callback;
  return std::nullopt;
}

std::string_view credential_class(Purpose purpose) {
  switch (purpose) {
    case Purpose::Request: return "P-CRED";
    case Purpose::Payload: return "S-CRED";
    case Purpose::Callback: return "C-CRED";
  }
  return "P-CRED";
}

Source Source::file(std::filesystem::path path) {
  return {Type::File, path.string()};
}
Source Source::generator(std::string name) {
  return {Type::Generator, std::move(name)};
}
Source Source::literal(std::string label) {
  return {Type::Literal, std::move(label)};
}

std::string_view to_string(Source::Type type) {
  switch (type) {
    case Source::Type::File: return "file";
    case Source::Type::Generator: return "generator";
    case Source::Type::Literal: return "literal";
  }
  return "literal";
}

// Credential ----------------------------------------------------------------

Credential::Credential(std::optional<std::string> string, CredentialKind kind,
                       CredentialMetadata metadata)
    : string_(std::move(string)), kind_(kind), metadata_(std::move(metadata)) {
  if (is_pair_kind(kind)) {
    throw IncompatibleKinds(std::string(to_string(kind)) +
                            " credentials must be built with make_pair");
  }
}

Credential Credential::with_string(std::optional<std::string> string) const {
  Credential copy = *this;
  copy.string_ = std::move(string);
  return copy;
}

Credential Credential::with_metadata(CredentialMetadata metadata) const {
  Credential copy = *this;
  copy.metadata_ = std::move(metadata);
  return copy;
}

bool Credential::operator==(const Credential& other) const {
  if (string_ != other.string_ || kind_ != other.kind_ ||
      metadata_ != other.metadata_) {
    return false;
  }
  if (!private_ || !other.private_) return !private_ && !other.private_;
  return *private_ == *other.private_;
}

CredentialPair::CredentialPair(const Credential& public_credential,
                               const Credential& private_credential,
                               CredentialKind kind) {
  string_ = public_credential.string_;
  kind_ = kind;
  metadata_ = public_credential.metadata_;
  private_ = std::make_shared<const Credential>(private_credential);
}

Credential CredentialPair::public_part() const {
  return Credential(string_, public_kind_of(kind_), metadata_);
}

CredentialPair CredentialPair::from(const Credential& credential) {
  if (!credential.is_pair()) {
    throw NotAPair(std::string(to_string(credential.kind())) +
                   " credential has no private part");
  }
  return CredentialPair(credential);
}

CredentialPair make_pair(const Credential& public_credential,
                         const Credential& private_credential) {
  const auto pub = public_credential.kind();
  const auto priv = private_credential.kind();
  if (pub == CredentialKind::X509Cert && priv == CredentialKind::X509Cert) {
    return CredentialPair(public_credential, private_credential,
                          CredentialKind::X509Pair);
  }
  if (pub == CredentialKind::Generic && priv == CredentialKind::Generic) {
    return CredentialPair(public_credential, private_credential,
                          CredentialKind::SshKeyPair);
  }
  throw IncompatibleKinds("cannot pair a " + std::string(to_string(pub)) +
                          " with a " + std::string(to_string(priv)));
}

const Credential& private_of(const Credential& credential) {
  if (!credential.private_) {
    throw NotAPair(std::string(to_string(credential.kind())) +
                   " credential has no private part");
  }
  return *credential.private_;
}

// TokenClaims ---------------------------------------------------------------

TokenClaims::TokenClaims(nlohmann::json claims) : claims_(std::move(claims)) {
  if (!claims_.is_object()) throw MalformedToken("claims are not a JSON object");
  for (const char* name : {"exp", "nbf", "iat"}) {
    const auto it = claims_.find(name);
    if (it == claims_.end()) continue;
    bool ok = false;
    if (it->is_number_unsigned()) {
      ok = true;
    } else if (it->is_number_integer()) {
      ok = it->get<std::int64_t>() >= 0;
    } else if (it->is_number_float()) {
      const double v = it->get<double>();
      ok = std::isfinite(v) && v >= 0 && std::floor(v) == v && v < 9.2e18;
    }
    if (!ok) {
      throw MalformedToken(std::string("claim '") + name +
                           "' is not a non-negative integer");
    }
  }
}

bool TokenClaims::contains(std::string_view name) const {
  return claims_.contains(name);
}

std::optional<std::string> TokenClaims::text(std::string_view name) const {
  const auto it = claims_.find(name);
  if (it == claims_.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (name == "aud" && it->is_array()) {
    std::string joined;
    for (const auto& v : *it) {
      if (!joined.empty()) joined += ' ';
      joined += v.is_string() ? v.get<std::string>() : v.dump();
    }
    return joined;
  }
  return it->dump();
}

std::optional<EpochSeconds> TokenClaims::seconds(std::string_view name) const {
  const auto it = claims_.find(name);
  if (it == claims_.end() || !it->is_number()) return std::nullopt;
  if (it->is_number_float()) {
    return static_cast<EpochSeconds>(it->get<double>());
  }
  return it->get<EpochSeconds>();
}

// Decoding ------------------------------------------------------------------

TokenClaims decode_token(std::string_view raw) {
  if (!detail::is_valid_utf8(raw)) throw EncodingError("token bytes are not valid UTF-8");
  const std::string_view text = strip(raw);
  if (text.empty()) throw MalformedToken("empty token");

  const auto parts = split_dots(text);
  if (parts.size() != 3) {
    throw MalformedToken("expected three dot-separated segments, found " +
                         std::to_string(parts.size()));
  }
  if (parts[0].empty() || parts[1].empty()) {
    throw MalformedToken("empty header or payload segment");
  }
  if (!base64url::is_alphabet(parts[2])) {
    throw MalformedToken("signature segment is not base64url");
  }
  parse_segment(parts[0], "header");
  return TokenClaims(parse_segment(parts[1], "payload"));
}

std::optional<Payload> payload(const Credential& credential) {
  if (credential.empty()) return std::nullopt;
  const std::string& s = *credential.string();
  const auto kind = public_kind_of(credential.kind());
  if (is_token_kind(kind)) return Payload{decode_token(s)};
  if (kind == CredentialKind::X509Cert) return Payload{decode_pem_bundle(s)};
  return Payload{OpaqueBlob{s}};
}

std::optional<std::string> subject(const Credential& credential) {
  require_token_kind(credential, "subject");
  const auto p = payload(credential);
  const auto* claims = claims_of(p);
  return claims ? claims->sub() : std::nullopt;
}

std::optional<std::string> scope(const Credential& credential) {
  require_token_kind(credential, "scope");
  const auto p = payload(credential);
  const auto* claims = claims_of(p);
  return claims ? claims->scope() : std::nullopt;
}

std::optional<std::string> issuer(const Credential& credential) {
  require_token_kind(credential, "issuer");
  const auto p = payload(credential);
  const auto* claims = claims_of(p);
  return claims ? claims->iss() : std::nullopt;
}

std::optional<EpochSeconds> expiry(const Credential& credential) {
  try {
    const auto p = payload(credential);
    if (!p) return std::nullopt;
    if (const auto* claims = std::get_if<TokenClaims>(&*p)) return claims->exp();
    if (const auto* bundle = std::get_if<PemBundle>(&*p)) {
      if (const auto* cert = bundle->leaf_certificate()) return cert->not_after;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

ValidityReport validate(const Credential& credential, EpochSeconds now) {
  ValidityReport report;
  if (credential.empty()) {
    report.problems.push_back("structure: empty credential");
    return report;
  }

  std::optional<Payload> p;
  try {
    p = payload(credential);
  } catch (const Error& e) {
    report.problems.push_back(std::string("structure: ") + e.what());
    return report;
  }
  report.structurally_valid = true;

  std::optional<EpochSeconds> not_before;
  std::optional<EpochSeconds> not_after;
  if (const auto* claims = std::get_if<TokenClaims>(&*p)) {
    not_before = claims->nbf();
    not_after = claims->exp();
  } else if (const auto* bundle = std::get_if<PemBundle>(&*p)) {
    if (const auto* cert = bundle->leaf_certificate()) {
      not_before = cert->not_before;
      not_after = cert->not_after;
    }
  }

  report.not_expired = !not_after || *not_after > now;
  report.not_before_ok = !not_before || *not_before <= now;
  if (not_after) report.seconds_remaining = *not_after - now;
  if (!report.not_expired) {
    report.problems.push_back("expired: expiry " + std::to_string(*not_after) +
                              " <= now " + std::to_string(now));
  }
  if (!report.not_before_ok) {
    report.problems.push_back("not yet valid: not-before " +
                              std::to_string(*not_before) + " > now " +
                              std::to_string(now));
  }
  return report;
}

// Files ---------------------------------------------------------------------

CredentialKind classify_file(const std::filesystem::path& path,
                             std::string_view contents) {
  const std::string ext = lower(path.extension().string());
  for (const auto& rule : kExtensionTable) {
    if (rule.extension == ext) return rule.kind;
  }

  const std::string_view text = strip(contents);
  const auto parts = split_dots(text);
  if (parts.size() == 3 && !parts[0].empty() && !parts[1].empty() &&
      base64url::is_alphabet(parts[0]) && base64url::is_alphabet(parts[1]) &&
      base64url::is_alphabet(parts[2])) {
    return CredentialKind::Token;
  }
  if (has_pem_armor(contents)) return CredentialKind::X509Cert;

  throw UnrecognizedCredential("cannot determine the credential kind of " +
                               path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw StorageError("error while reading " + path.string());
  return buffer.str();
}

Credential load_credential_file(const std::filesystem::path& path,
                                CredentialMetadata metadata) {
  if (metadata.source.descriptor.empty()) metadata.source = Source::file(path);
  std::string contents = read_file(path);
  const CredentialKind kind = classify_file(path, contents);

  std::filesystem::path private_path = path;
  if (kind == CredentialKind::SshKeyPair) {
    private_path.replace_extension();
  } else if (kind == CredentialKind::X509Cert && lower(path.extension().string()) == ".crt") {
    private_path.replace_extension(".key");
    std::error_code ec;
    if (!std::filesystem::is_regular_file(private_path, ec)) private_path.clear();
  } else {
    private_path.clear();
  }
  if (private_path.empty()) {
    return Credential(std::move(contents), kind, std::move(metadata));
  }

  const CredentialKind half =
      kind == CredentialKind::SshKeyPair ? CredentialKind::Generic : kind;
  Credential pub(std::move(contents), half, metadata);
  CredentialMetadata private_metadata;
  private_metadata.source = Source::file(private_path);
  Credential priv(read_file(private_path), half, private_metadata);
  return make_pair(pub, priv);
}

}  // namespace credstack
