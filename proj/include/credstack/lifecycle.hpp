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

// File-backed credential store with renewal and invalidation.
//
// Layout of a store directory:
//
//   <dir>/<id><ext>   credential string, mode 0600
//   <dir>/<id>.key    private half of an X509Pair (public half in <id>.crt)
//   <dir>/<id>        private half of an SshKeyPair (public half in <id>.pub)
//   <dir>/index.json  entry metadata
//
// Every file is written to a temporary sibling and renamed into place, so a
// failed write leaves the previous contents untouched.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "credstack/credential.hpp"
#include "credstack/generators.hpp"
#include "json.hpp"

namespace credstack {

struct RenewalPolicy {
  // Renew when less than this many seconds remain. When unset the threshold
  // is a third of the credential's original lifetime, but at least 300 s.
  std::optional<std::int64_t> threshold_seconds;
  std::int64_t min_interval_seconds = 0;

  // Throws std::invalid_argument for a non-positive threshold or a negative
  // interval.
  void check() const;
};

inline constexpr std::int64_t kMinimumDefaultThreshold = 300;

enum class EntryStatus { Active, Invalidated };
std::string_view to_string(EntryStatus status);

// How to rebuild an entry's renewer after a restart.
struct RenewerSpec {
  std::string generator;
  nlohmann::json context;

  bool operator==(const RenewerSpec&) const = default;
};

struct StoreEntry {
  std::string id;
  Credential credential;
  EpochSeconds stored_at = 0;
  std::filesystem::path path;
  std::shared_ptr<GeneratorHandle> renewer;
  std::optional<RenewerSpec> renewer_spec;
  EntryStatus status = EntryStatus::Active;
  std::optional<EpochSeconds> last_renewed_at;
};

// Stable key: SHA-256 over (purpose, trust domain, source), hex, 32 chars.
std::string entry_id(const Credential& credential);

// Threshold in effect for `entry` under `policy`.
std::int64_t renewal_threshold(const StoreEntry& entry, const RenewalPolicy& policy);

// True iff the credential has an expiry and fewer than the threshold seconds
// remain. Credentials without expiry never need renewal.
bool needs_renewal(const StoreEntry& entry, EpochSeconds now,
                   const RenewalPolicy& policy);

struct RenewOutcome {
  enum class Status { Renewed, Skipped };

  Status status = Status::Renewed;
  StoreEntry entry;
  std::string reason;  // why it was skipped
};

struct TickReport {
  std::vector<std::string> renewed;
  std::vector<std::pair<std::string, std::string>> skipped;  // id, reason
  std::vector<std::pair<std::string, std::string>> failed;   // id, message

  bool ok() const { return failed.empty(); }
  nlohmann::json to_json() const;
};

// Filesystem seams, replaceable in tests.
struct StoreOptions {
  std::function<int(const char* from, const char* to)> rename;
};

class CredentialStore {
 public:
  // Opens `dir`, loading index.json when present. Throws StorageError if the
  // directory does not exist or the index is unreadable.
  explicit CredentialStore(std::filesystem::path dir, StoreOptions options = {});

  CredentialStore(const CredentialStore&) = delete;
  CredentialStore& operator=(const CredentialStore&) = delete;

  const std::filesystem::path& directory() const { return dir_; }

  // Writes the credential as <id><ext> (replacing an entry with the same id)
  // and updates the index. Throws StorageError.
  StoreEntry store(const Credential& credential, EpochSeconds now,
                   std::shared_ptr<GeneratorHandle> renewer = nullptr,
                   std::optional<RenewerSpec> renewer_spec = std::nullopt);

  // Active entries only; throws NotFound otherwise.
  StoreEntry lookup(const std::string& id) const;
  std::vector<StoreEntry> entries() const;
  std::vector<StoreEntry> all_entries() const;

  // Marks the entry invalidated and removes its files. Invalidating an
  // already invalidated entry is a no-op. Throws NotFound for unknown ids and
  // StorageError when a file cannot be removed (the entry stays invalidated).
  StoreEntry invalidate(const std::string& id);

  // Generates a replacement credential with the entry's renewer and stores it
  // under the same id. Returns Skipped when called within
  // policy.min_interval_seconds of the previous renewal. Throws NotFound,
  // NoRenewer, RenewalRejected (replacement malformed or expiring earlier),
  // and propagates generator and storage errors.
  RenewOutcome renew(const std::string& id, const RuntimeArgs& args,
                     EpochSeconds now, const RenewalPolicy& policy);

  // One scheduler pass: renews every due entry. Never throws for individual
  // entries; all outcomes are in the report. Must not run concurrently with
  // itself.
  TickReport tick(EpochSeconds now, const RenewalPolicy& policy,
                  const RuntimeArgs& args);

  void set_renewer(const std::string& id, std::shared_ptr<GeneratorHandle> renewer,
                   std::optional<RenewerSpec> spec = std::nullopt);

  // Loads a handle for every entry that has a persisted spec but no live
  // renewer. Returns (id, message) for specs that fail to load; those entries
  // are reported as failed by tick when due.
  std::vector<std::pair<std::string, std::string>> attach_renewers(
      const GeneratorRegistry& registry);

 private:
  void load_index();
  void write_index_locked();
  void write_credential_files_locked(StoreEntry& entry);
  RenewOutcome renew_locked(StoreEntry& entry, const RuntimeArgs& args,
                            EpochSeconds now, const RenewalPolicy& policy);
  void atomic_write(const std::filesystem::path& path, std::string_view contents);

  std::filesystem::path dir_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, StoreEntry> entries_;
  std::map<std::string, std::string> attach_errors_;
};

}  // namespace credstack
