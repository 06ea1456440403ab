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

// Generator framework: named plugins that produce credential strings or
// parameter values at runtime from a context map and per-request arguments.
//
// In-process generators are registered with GeneratorRegistry (see
// export_generator). Executables found in the configured plugin directory
// are loadable by file name and speak the callout wire protocol
// (callout.hpp).

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "credstack/credential.hpp"
#include "json.hpp"

namespace credstack {

// Context map of a generator. Always a JSON object carrying a non-empty
// string under "type".
class GeneratorContext {
 public:
  // Throws InvalidContext when `entries` is not an object or lacks "type".
  explicit GeneratorContext(nlohmann::json entries);

  const nlohmann::json& entries() const { return entries_; }
  std::string type() const { return entries_.at("type").get<std::string>(); }
  // nullptr when absent.
  const nlohmann::json* find(std::string_view key) const;

  bool operator==(const GeneratorContext&) const = default;

 private:
  nlohmann::json entries_;
};

// Arguments supplied by the caller of generate(). Keys in extra can never
// shadow the named fields.
class RuntimeArgs {
 public:
  std::optional<std::string> site_name;
  std::optional<std::string> trust_domain;
  std::optional<Purpose> purpose;

  // Throws std::invalid_argument for "site_name", "trust_domain", "purpose".
  void set_extra(const std::string& key, nlohmann::json value);
  const nlohmann::json& extra() const { return extra_; }

  // {"site_name": ..., "trust_domain": ..., "purpose": ...}, null when unset.
  nlohmann::json named_json() const;

 private:
  nlohmann::json extra_ = nlohmann::json::object();
};

struct GeneratedValue {
  std::string type_tag;
  std::string value;
  std::optional<EpochSeconds> expiry;

  bool operator==(const GeneratedValue&) const = default;
};

// Shared settings handed to generator factories at load time.
struct GeneratorEnvironment {
  std::filesystem::path plugin_dir;
  std::chrono::milliseconds callout_timeout{std::chrono::seconds(30)};
  // Clock used by generators that stamp times. Defaults to the system clock.
  std::function<EpochSeconds()> clock;

  EpochSeconds now() const;
};

class Generator {
 public:
  explicit Generator(GeneratorContext context) : context_(std::move(context)) {}
  virtual ~Generator() = default;

  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  virtual GeneratedValue generate(const RuntimeArgs& args) = 0;

  const GeneratorContext& context() const { return context_; }

 protected:
  // Tags the value with the context "type".
  GeneratedValue make_value(std::string value,
                            std::optional<EpochSeconds> expiry = {}) const;

 private:
  GeneratorContext context_;
};

using GeneratorFactory = std::function<std::unique_ptr<Generator>(
    const GeneratorContext&, const GeneratorEnvironment&)>;

// A loaded generator. Holds mutable generator state (e.g. a round-robin
// cursor), so a handle must not be used from two threads at once.
class GeneratorHandle {
 public:
  GeneratorHandle(std::string name, std::unique_ptr<Generator> generator);

  const std::string& name() const { return name_; }
  const GeneratorContext& context() const { return generator_->context(); }
  Generator& generator() { return *generator_; }
  const Generator& generator() const { return *generator_; }

  GeneratedValue generate(const RuntimeArgs& args);

 private:
  std::string name_;
  std::unique_ptr<Generator> generator_;
};

GeneratedValue generate(GeneratorHandle& handle, const RuntimeArgs& args);

class GeneratorRegistry {
 public:
  explicit GeneratorRegistry(GeneratorEnvironment environment = {});

  GeneratorRegistry(const GeneratorRegistry&) = delete;
  GeneratorRegistry& operator=(const GeneratorRegistry&) = delete;

  // Re-registering a name replaces the previous factory and records a
  // warning.
  void register_generator(const std::string& name, GeneratorFactory factory);

  // Throws UnknownGenerator, InvalidContext, or whatever the factory raises
  // while validating its context.
  GeneratorHandle load_generator(const std::string& name,
                                 const nlohmann::json& context) const;
  // Same, with an explicit environment instead of the registry's own.
  GeneratorHandle load_generator(const std::string& name,
                                 const nlohmann::json& context,
                                 const GeneratorEnvironment& environment) const;

  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<std::string> warnings() const;

  GeneratorEnvironment environment() const;
  void set_environment(GeneratorEnvironment environment);

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, GeneratorFactory, std::less<>> factories_;
  std::vector<std::string> warnings_;
  GeneratorEnvironment environment_;
};

// Registers G under `name`. G is constructed from (const GeneratorContext&)
// or (const GeneratorContext&, const GeneratorEnvironment&).
template <typename G>
void export_generator(GeneratorRegistry& registry, const std::string& name) {
  static_assert(std::is_base_of_v<Generator, G>);
  registry.register_generator(
      name,
      [](const GeneratorContext& context,
         const GeneratorEnvironment& environment) -> std::unique_ptr<Generator> {
        if constexpr (std::is_constructible_v<G, const GeneratorContext&,
                                              const GeneratorEnvironment&>) {
          return std::make_unique<G>(context, environment);
        } else {
          (void)environment;
          return std::make_unique<G>(context);
        }
      });
}

// Built-in generators --------------------------------------------------------

inline constexpr std::string_view kNoItemsMessage =
    "No items provided for generation";

// Cycles through context "items" in list order, starting at items[0].
class RoundRobinGenerator : public Generator {
 public:
  explicit RoundRobinGenerator(const GeneratorContext& context);
  GeneratedValue generate(const RuntimeArgs& args) override;

  std::size_t cursor() const { return cursor_; }

 private:
  nlohmann::json items_;
  std::size_t cursor_ = 0;
};

// Uniform choice from context "items". An integer "seed" in the context
// makes the sequence reproducible.
class RandomGenerator : public Generator {
 public:
  explicit RandomGenerator(const GeneratorContext& context);
  GeneratedValue generate(const RuntimeArgs& args) override;

 private:
  nlohmann::json items_;
  std::mt19937_64 engine_;
};

// Adapter for callout executables: context "callout" names the executable,
// optional "kwargs" are forwarded to it.
class LegacyGenerator : public Generator {
 public:
  LegacyGenerator(const GeneratorContext& context,
                  const GeneratorEnvironment& environment);
  GeneratedValue generate(const RuntimeArgs& args) override;

  const std::filesystem::path& executable() const { return executable_; }

 protected:
  LegacyGenerator(const GeneratorContext& context,
                  const GeneratorEnvironment& environment,
                  const std::filesystem::path& executable);

 private:
  std::filesystem::path executable_;
  nlohmann::json kwargs_;
  std::chrono::milliseconds timeout_;
};

// Mints HS256 test tokens: context "key" (required), "ttl" seconds
// (default 3600), "claims" object. The token kind follows context "type".
// When a site name is supplied and the claims carry no "aud", the site name
// becomes the audience.
class HmacTokenGenerator : public Generator {
 public:
  HmacTokenGenerator(const GeneratorContext& context,
                     const GeneratorEnvironment& environment);
  GeneratedValue generate(const RuntimeArgs& args) override;

 private:
  std::string key_;
  std::int64_t ttl_;
  nlohmann::json claims_;
  std::function<EpochSeconds()> clock_;
};

// RoundRobinGenerator, RandomGenerator, LegacyGenerator, HmacTokenGenerator.
void register_builtin_generators(GeneratorRegistry& registry);

// Text form of a context item: strings verbatim, anything else as JSON.
std::string item_text(const nlohmann::json& item);

}  // namespace credstack
