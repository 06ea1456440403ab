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

#include "credstack/lifecycle.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include "credstack/error.hpp"

namespace credstack {
namespace {

namespace fs = std::filesystem;

constexpr const char* kIndexName = "index.json";
constexpr int kIndexVersion = 1;

std::string errno_text(int err) { return std::strerror(err); }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw StorageError("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(size * 2);
  for (unsigned int i = 0; i < size; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

// Beginning of the credential's validity window, used to estimate its
// original lifetime.
std::optional<EpochSeconds> issued_at(const Credential& credential) {
  try {
    const auto p = payload(credential);
    if (!p) return std::nullopt;
    if (const auto* claims = std::get_if<TokenClaims>(&*p)) return claims->iat();
    if (const auto* bundle = std::get_if<PemBundle>(&*p)) {
      if (const auto* cert = bundle->leaf_certificate()) return cert->not_before;
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

fs::path public_file(const fs::path& dir, const std::string& id, CredentialKind kind) {
  return dir / (id + std::string(canonical_extension(kind)));
}

// Location of the private half of a pair, next to the public file.
fs::path private_file(const fs::path& dir, const std::string& id, CredentialKind kind) {
  if (kind == CredentialKind::X509Pair) return dir / (id + ".key");
  return dir / id;
}

nlohmann::json optional_json(const std::optional<std::string>& value) {
  return value ? nlohmann::json(*value) : nlohmann::json();
}

std::optional<std::string> optional_text(const nlohmann::json& object,
                                         const char* key) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

Source::Type source_type_from_string(const std::string& name) {
  if (name == "file") return Source::Type::File;
  if (name == "generator") return Source::Type::Generator;
  if (name == "literal") return Source::Type::Literal;
  throw StorageError("unknown source type '" + name + "'");
}

nlohmann::json entry_to_json(const StoreEntry& entry) {
  const Credential& credential = entry.credential;
  nlohmann::json out = {
      {"id", entry.id},
      {"kind", std::string(to_string(credential.kind()))},
      {"file", entry.path.filename().string()},
      {"purpose", credential.purpose()
                      ? nlohmann::json(std::string(to_string(*credential.purpose())))
                      : nlohmann::json()},
      {"trust_domain", optional_json(credential.trust_domain())},
      {"security_class", optional_json(credential.security_class())},
      {"stored_at", entry.stored_at},
      {"status", std::string(to_string(entry.status))},
      {"source",
       {{"type", std::string(to_string(credential.source().type))},
        {"descriptor", credential.source().descriptor}}},
  };
  out["last_renewed_at"] =
      entry.last_renewed_at ? nlohmann::json(*entry.last_renewed_at) : nlohmann::json();
  if (entry.renewer_spec) {
    out["renewer"] = {{"generator", entry.renewer_spec->generator},
                      {"context", entry.renewer_spec->context}};
  } else {
    out["renewer"] = nullptr;
  }
  return out;
}

}  // namespace

// Policy and free functions -------------------------------------------------

void RenewalPolicy::check() const {
  if (threshold_seconds && *threshold_seconds <= 0) {
    throw std::invalid_argument("renewal threshold must be positive");
  }
  if (min_interval_seconds < 0) {
    throw std::invalid_argument("minimum renewal interval must not be negative");
  }
}

std::string_view to_string(EntryStatus status) {
  return status == EntryStatus::Active ? "active" : "invalidated";
}

std::string entry_id(const Credential& credential) {
  std::string key;
  key += credential.purpose() ? to_string(*credential.purpose()) : "-";
  key += '\n';
  key += credential.trust_domain().value_or("-");
  key += '\n';
  key += to_string(credential.source().type);
  key += ':';
  key += credential.source().descriptor;
  return sha256_hex(key).substr(0, 32);
}

std::int64_t renewal_threshold(const StoreEntry& entry, const RenewalPolicy& policy) {
  if (policy.threshold_seconds) return *policy.threshold_seconds;
  const auto expires = expiry(entry.credential);
  if (!expires) return kMinimumDefaultThreshold;
  const EpochSeconds start = issued_at(entry.credential).value_or(entry.stored_at);
  const std::int64_t lifetime = *expires - start;
  return std::max(kMinimumDefaultThreshold, lifetime / 3);
}

bool needs_renewal(const StoreEntry& entry, EpochSeconds now,
                   const RenewalPolicy& policy) {
  if (entry.status != EntryStatus::Active) return false;
  const auto expires = expiry(entry.credential);
  if (!expires) return false;
  return *expires - now < renewal_threshold(entry, policy);
}

nlohmann::json TickReport::to_json() const {
  nlohmann::json out = {{"renewed", renewed},
                        {"skipped", nlohmann::json::array()},
                        {"failed", nlohmann::json::array()}};
  for (const auto& [id, reason] : skipped) {
    out["skipped"].push_back({{"id", id}, {"reason", reason}});
  }
  for (const auto& [id, message] : failed) {
    out["failed"].push_back({{"id", id}, {"error", message}});
  }
  return out;
}

// Store ---------------------------------------------------------------------

CredentialStore::CredentialStore(fs::path dir, StoreOptions options)
    : dir_(std::move(dir)), options_(std::move(options)) {
  if (!options_.rename) options_.rename = [](const char* from, const char* to) {
    return ::rename(from, to);
  };
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) {
    throw StorageError("store directory " + dir_.string() + " does not exist");
  }
  load_index();
}

void CredentialStore::atomic_write(const fs::path& path, std::string_view contents) {
  std::string temp = (path.parent_path() / ("." + path.filename().string() + ".XXXXXX")).string();
  // mkstemp creates the file with mode 0600 and O_EXCL.
  const int fd = ::mkstemp(temp.data());
  if (fd < 0) {
    throw StorageError("cannot create temporary file in " +
                       path.parent_path().string() + ": " + errno_text(errno));
  }
  auto fail = [&](const std::string& what) {
    const int err = errno;
    ::close(fd);
    ::unlink(temp.c_str());
    throw StorageError(what + " " + path.string() + ": " + errno_text(err));
  };
  if (::fchmod(fd, 0600) != 0) fail("cannot set permissions on");
  std::size_t written = 0;
  while (written < contents.size()) {
    const ssize_t n = ::write(fd, contents.data() + written, contents.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("cannot write");
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) fail("cannot sync");
  if (::close(fd) != 0) {
    const int err = errno;
    ::unlink(temp.c_str());
    throw StorageError("cannot close " + path.string() + ": " + errno_text(err));
  }
  if (options_.rename(temp.c_str(), path.c_str()) != 0) {
    const int err = errno;
    ::unlink(temp.c_str());
    throw StorageError("cannot rename into " + path.string() + ": " + errno_text(err));
  }

  struct stat info {};
  if (::stat(path.c_str(), &info) != 0) {
    throw StorageError("cannot stat " + path.string() + ": " + errno_text(errno));
  }
  if ((info.st_mode & 07777) != 0600) {
    throw StorageError("refusing " + path.string() + ": mode is not 0600");
  }
}

void CredentialStore::load_index() {
  const fs::path index_path = dir_ / kIndexName;
  std::error_code ec;
  if (!fs::exists(index_path, ec)) return;

  nlohmann::json index;
  try {
    index = nlohmann::json::parse(read_file(index_path));
  } catch (const nlohmann::json::exception& e) {
    throw StorageError("unreadable index " + index_path.string() + ": " + e.what());
  }

  try {
    if (!index.is_object() || index.value("version", 0) != kIndexVersion) {
      throw StorageError("unsupported index format");
    }
    for (const auto& item : index.at("entries")) {
      StoreEntry entry;
      entry.id = item.at("id").get<std::string>();
      const auto kind_name = item.at("kind").get<std::string>();
      const auto kind = kind_from_string(kind_name);
      if (!kind) throw StorageError("unknown kind '" + kind_name + "'");

      CredentialMetadata metadata;
      if (auto purpose = optional_text(item, "purpose")) {
        metadata.purpose = purpose_from_string(*purpose);
      }
      metadata.trust_domain = optional_text(item, "trust_domain");
      metadata.security_class = optional_text(item, "security_class");
      const auto& source = item.at("source");
      metadata.source.type = source_type_from_string(source.at("type").get<std::string>());
      metadata.source.descriptor = source.at("descriptor").get<std::string>();

      entry.stored_at = item.at("stored_at").get<EpochSeconds>();
      entry.status = item.at("status").get<std::string>() == "active"
                         ? EntryStatus::Active
                         : EntryStatus::Invalidated;
      if (const auto it = item.find("last_renewed_at"); it != item.end() && !it->is_null()) {
        entry.last_renewed_at = it->get<EpochSeconds>();
      }
      if (const auto it = item.find("renewer"); it != item.end() && !it->is_null()) {
        entry.renewer_spec = RenewerSpec{it->at("generator").get<std::string>(),
                                         it->at("context")};
      }
      entry.path = dir_ / item.at("file").get<std::string>();

      if (entry.status == EntryStatus::Active) {
        if (is_pair_kind(*kind)) {
          const CredentialKind half = public_kind_of(*kind);
          const Credential pub(read_file(entry.path), half, metadata);
          const Credential priv(read_file(private_file(dir_, entry.id, *kind)), half,
                                metadata);
          entry.credential = make_pair(pub, priv);
        } else {
          entry.credential = Credential(read_file(entry.path), *kind, metadata);
        }
      } else {
        entry.credential = Credential(std::nullopt, public_kind_of(*kind), metadata);
      }
      entries_.insert_or_assign(entry.id, std::move(entry));
    }
  } catch (Error& e) {
    e.add_context("loading " + index_path.string());
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw StorageError("malformed index " + index_path.string() + ": " + e.what());
  }
}

void CredentialStore::write_index_locked() {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [id, entry] : entries_) entries.push_back(entry_to_json(entry));
  const nlohmann::json index = {{"version", kIndexVersion}, {"entries", entries}};
  atomic_write(dir_ / kIndexName, index.dump(2) + "\n");
}

void CredentialStore::write_credential_files_locked(StoreEntry& entry) {
  const Credential& credential = entry.credential;
  entry.path = public_file(dir_, entry.id, credential.kind());
  if (credential.is_pair()) {
    const Credential& priv = private_of(credential);
    atomic_write(private_file(dir_, entry.id, credential.kind()),
                 priv.string().value_or(""));
  }
  atomic_write(entry.path, credential.string().value_or(""));
}

StoreEntry CredentialStore::store(const Credential& credential, EpochSeconds now,
                                  std::shared_ptr<GeneratorHandle> renewer,
                                  std::optional<RenewerSpec> renewer_spec) {
  StoreEntry entry;
  entry.id = entry_id(credential);
  entry.credential = credential;
  entry.stored_at = now;
  entry.renewer = std::move(renewer);
  entry.renewer_spec = std::move(renewer_spec);
  if (entry.renewer && !entry.renewer_spec) {
    entry.renewer_spec = RenewerSpec{entry.renewer->name(),
                                     entry.renewer->context().entries()};
  }

  std::unique_lock lock(mutex_);
  write_credential_files_locked(entry);
  auto previous = entries_.find(entry.id);
  std::optional<StoreEntry> saved;
  if (previous != entries_.end()) saved = previous->second;
  entries_.insert_or_assign(entry.id, entry);
  try {
    write_index_locked();
  } catch (...) {
    if (saved) {
      entries_.insert_or_assign(entry.id, *saved);
    } else {
      entries_.erase(entry.id);
    }
    throw;
  }
  attach_errors_.erase(entry.id);
  return entry;
}

StoreEntry CredentialStore::lookup(const std::string& id) const {
  std::shared_lock lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end() || it->second.status != EntryStatus::Active) {
    throw NotFound("no active credential with id " + id);
  }
  return it->second;
}

std::vector<StoreEntry> CredentialStore::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<StoreEntry> out;
  for (const auto& [id, entry] : entries_) {
    if (entry.status == EntryStatus::Active) out.push_back(entry);
  }
  return out;
}

std::vector<StoreEntry> CredentialStore::all_entries() const {
  std::shared_lock lock(mutex_);
  std::vector<StoreEntry> out;
  for (const auto& [id, entry] : entries_) out.push_back(entry);
  return out;
}

StoreEntry CredentialStore::invalidate(const std::string& id) {
  std::unique_lock lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFound("no credential with id " + id);
  StoreEntry& entry = it->second;
  if (entry.status == EntryStatus::Invalidated) return entry;

  const CredentialKind kind = entry.credential.kind();
  entry.status = EntryStatus::Invalidated;
  entry.renewer.reset();
  write_index_locked();

  std::vector<fs::path> files = {entry.path};
  if (is_pair_kind(kind)) files.push_back(private_file(dir_, id, kind));
  entry.credential = Credential(std::nullopt, public_kind_of(kind),
                                entry.credential.metadata());
  for (const auto& file : files) {
    std::error_code ec;
    fs::remove(file, ec);
    if (ec) throw StorageError("cannot remove " + file.string() + ": " + ec.message());
  }
  return entry;
}

RenewOutcome CredentialStore::renew(const std::string& id, const RuntimeArgs& args,
                                    EpochSeconds now, const RenewalPolicy& policy) {
  policy.check();
  std::unique_lock lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end() || it->second.status != EntryStatus::Active) {
    throw NotFound("no active credential with id " + id);
  }
  return renew_locked(it->second, args, now, policy);
}

RenewOutcome CredentialStore::renew_locked(StoreEntry& entry, const RuntimeArgs& args,
                                           EpochSeconds now,
                                           const RenewalPolicy& policy) {
  if (!entry.renewer) {
    if (const auto error = attach_errors_.find(entry.id); error != attach_errors_.end()) {
      throw NoRenewer("renewer for " + entry.id + " failed to load: " + error->second);
    }
    throw NoRenewer("credential " + entry.id + " has no renewer");
  }
  if (entry.last_renewed_at && policy.min_interval_seconds > 0) {
    const std::int64_t since = now - *entry.last_renewed_at;
    if (since < policy.min_interval_seconds) {
      return RenewOutcome{RenewOutcome::Status::Skipped, entry,
                          "renewed " + std::to_string(since) + " s ago, minimum interval " +
                              std::to_string(policy.min_interval_seconds) + " s"};
    }
  }

  RuntimeArgs call_args = args;
  if (!call_args.trust_domain) call_args.trust_domain = entry.credential.trust_domain();
  if (!call_args.purpose) call_args.purpose = entry.credential.purpose();
  const GeneratedValue generated = entry.renewer->generate(call_args);

  const Credential replacement = entry.credential.with_string(generated.value);
  const ValidityReport report = validate(replacement, now);
  if (!report.structurally_valid) {
    std::string why = report.problems.empty() ? "malformed" : report.problems.front();
    throw RenewalRejected("replacement for " + entry.id + " rejected: " + why);
  }
  const auto old_expiry = expiry(entry.credential);
  const auto new_expiry = expiry(replacement);
  if (old_expiry && new_expiry && *new_expiry < *old_expiry) {
    throw RenewalRejected("replacement for " + entry.id + " expires at " +
                          std::to_string(*new_expiry) + ", before the current " +
                          std::to_string(*old_expiry));
  }

  StoreEntry updated = entry;
  updated.credential = replacement;
  updated.stored_at = now;
  updated.last_renewed_at = now;
  write_credential_files_locked(updated);
  const StoreEntry previous = entry;
  entry = updated;
  try {
    write_index_locked();
  } catch (...) {
    entry = previous;
    throw;
  }
  return RenewOutcome{RenewOutcome::Status::Renewed, entry, {}};
}

TickReport CredentialStore::tick(EpochSeconds now, const RenewalPolicy& policy,
                                 const RuntimeArgs& args) {
  policy.check();
  TickReport report;
  std::unique_lock lock(mutex_);
  for (auto& [id, entry] : entries_) {
    if (!needs_renewal(entry, now, policy)) continue;
    if (!entry.renewer) {
      if (const auto error = attach_errors_.find(id); error != attach_errors_.end()) {
        report.failed.emplace_back(id, "renewer failed to load: " + error->second);
      } else {
        report.skipped.emplace_back(id, "no renewer");
      }
      continue;
    }
    try {
      const RenewOutcome outcome = renew_locked(entry, args, now, policy);
      if (outcome.status == RenewOutcome::Status::Renewed) {
        report.renewed.push_back(id);
      } else {
        report.skipped.emplace_back(id, outcome.reason);
      }
    } catch (const std::exception& e) {
      report.failed.emplace_back(id, e.what());
    }
  }
  return report;
}

void CredentialStore::set_renewer(const std::string& id,
                                  std::shared_ptr<GeneratorHandle> renewer,
                                  std::optional<RenewerSpec> spec) {
  std::unique_lock lock(mutex_);
  const auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFound("no credential with id " + id);
  if (renewer && !spec) {
    spec = RenewerSpec{renewer->name(), renewer->context().entries()};
  }
  it->second.renewer = std::move(renewer);
  it->second.renewer_spec = std::move(spec);
  attach_errors_.erase(id);
  write_index_locked();
}

std::vector<std::pair<std::string, std::string>> CredentialStore::attach_renewers(
    const GeneratorRegistry& registry) {
  std::unique_lock lock(mutex_);
  std::vector<std::pair<std::string, std::string>> errors;
  for (auto& [id, entry] : entries_) {
    if (entry.status != EntryStatus::Active || entry.renewer || !entry.renewer_spec) {
      continue;
    }
    try {
      entry.renewer = std::make_shared<GeneratorHandle>(registry.load_generator(
          entry.renewer_spec->generator, entry.renewer_spec->context));
      attach_errors_.erase(id);
    } catch (const std::exception& e) {
      attach_errors_[id] = e.what();
      errors.emplace_back(id, e.what());
    }
  }
  return errors;
}

}  // namespace credstack
