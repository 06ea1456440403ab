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

#include "credstack/generators.hpp"

#include <unistd.h>

#include <mutex>
#include <stdexcept>

#include "credstack/callout.hpp"
#include "credstack/error.hpp"
#include "credstack/test_token.hpp"

namespace credstack {
namespace {

nlohmann::json items_from(const GeneratorContext& context, const char* generator) {
  const auto* items = context.find("items");
  if (!items) return nlohmann::json::array();
  if (!items->is_array()) {
    throw InvalidContext(std::string(generator) + ": context 'items' must be a list");
  }
  return *items;
}

// Executables dropped into the plugin directory, loaded by file name.
class PluginGenerator : public LegacyGenerator {
 public:
  PluginGenerator(const GeneratorContext& context,
                  const GeneratorEnvironment& environment,
                  const std::filesystem::path& executable)
      : LegacyGenerator(context, environment, executable) {}
};

std::optional<std::filesystem::path> find_plugin(
    const std::filesystem::path& plugin_dir, const std::string& name) {
  if (plugin_dir.empty() || name.find('/') != std::string::npos) {
    return std::nullopt;
  }
  const auto candidate = plugin_dir / name;
  std::error_code ec;
  if (std::filesystem::is_regular_file(candidate, ec) &&
      ::access(candidate.c_str(), X_OK) == 0) {
    return candidate;
  }
  return std::nullopt;
}

}  // namespace

GeneratorContext::GeneratorContext(nlohmann::json entries)
    : entries_(std::move(entries)) {
  if (!entries_.is_object()) {
    throw InvalidContext("generator context must be a map");
  }
  const auto it = entries_.find("type");
  if (it == entries_.end()) {
    throw InvalidContext("generator context must contain the \"type\" key");
  }
  if (!it->is_string() || it->get<std::string>().empty()) {
    throw InvalidContext("generator context \"type\" must be non-empty text");
  }
}

const nlohmann::json* GeneratorContext::find(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &*it;
}

void RuntimeArgs::set_extra(const std::string& key, nlohmann::json value) {
  if (key == "site_name" || key == "trust_domain" || key == "purpose") {
    throw std::invalid_argument("extra argument '" + key +
                                "' would shadow a named runtime argument");
  }
  extra_[key] = std::move(value);
}

nlohmann::json RuntimeArgs::named_json() const {
  nlohmann::json out = nlohmann::json::object();
  out["site_name"] = site_name ? nlohmann::json(*site_name) : nlohmann::json();
  out["trust_domain"] =
      trust_domain ? nlohmann::json(*trust_domain) : nlohmann::json();
  out["purpose"] = purpose ? nlohmann::json(std::string(to_string(*purpose)))
                           : nlohmann::json();
  return out;
}

EpochSeconds GeneratorEnvironment::now() const {
  if (clock) return clock();
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

GeneratedValue Generator::make_value(std::string value,
                                     std::optional<EpochSeconds> expiry) const {
  return GeneratedValue{context_.type(), std::move(value), expiry};
}

// Handles and registry ------------------------------------------------------

GeneratorHandle::GeneratorHandle(std::string name,
                                 std::unique_ptr<Generator> generator)
    : name_(std::move(name)), generator_(std::move(generator)) {}

GeneratedValue GeneratorHandle::generate(const RuntimeArgs& args) {
  return generator_->generate(args);
}

GeneratedValue generate(GeneratorHandle& handle, const RuntimeArgs& args) {
  return handle.generate(args);
}

GeneratorRegistry::GeneratorRegistry(GeneratorEnvironment environment)
    : environment_(std::move(environment)) {}

void GeneratorRegistry::register_generator(const std::string& name,
                                           GeneratorFactory factory) {
  if (name.empty()) throw std::invalid_argument("generator name is empty");
  std::unique_lock lock(mutex_);
  auto [it, inserted] = factories_.insert_or_assign(name, std::move(factory));
  if (!inserted) {
    warnings_.push_back("generator '" + name +
                        "' re-registered; previous factory replaced");
  }
}

GeneratorHandle GeneratorRegistry::load_generator(
    const std::string& name, const nlohmann::json& context) const {
  return load_generator(name, context, environment());
}

GeneratorHandle GeneratorRegistry::load_generator(
    const std::string& name, const nlohmann::json& context,
    const GeneratorEnvironment& environment) const {
  GeneratorFactory factory;
  {
    std::shared_lock lock(mutex_);
    if (auto it = factories_.find(name); it != factories_.end()) {
      factory = it->second;
    }
  }
  if (!factory) {
    if (auto plugin = find_plugin(environment.plugin_dir, name)) {
      GeneratorContext ctx(context);
      return GeneratorHandle(
          name, std::make_unique<PluginGenerator>(ctx, environment, *plugin));
    }
    throw UnknownGenerator("unknown generator '" + name + "'");
  }
  GeneratorContext ctx(context);
  auto generator = factory(ctx, environment);
  if (!generator) {
    throw InvalidContext("generator '" + name + "' factory returned nothing");
  }
  return GeneratorHandle(name, std::move(generator));
}

bool GeneratorRegistry::contains(const std::string& name) const {
  std::shared_lock lock(mutex_);
  return factories_.contains(name);
}

std::vector<std::string> GeneratorRegistry::names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  out.reserve(factories_.size());
  for (const auto& [name, factory] : factories_) out.push_back(name);
  return out;
}

std::vector<std::string> GeneratorRegistry::warnings() const {
  std::shared_lock lock(mutex_);
  return warnings_;
}

GeneratorEnvironment GeneratorRegistry::environment() const {
  std::shared_lock lock(mutex_);
  return environment_;
}

void GeneratorRegistry::set_environment(GeneratorEnvironment environment) {
  std::unique_lock lock(mutex_);
  environment_ = std::move(environment);
}

// Built-ins -----------------------------------------------------------------

std::string item_text(const nlohmann::json& item) {
  return item.is_string() ? item.get<std::string>() : item.dump();
}

RoundRobinGenerator::RoundRobinGenerator(const GeneratorContext& context)
    : Generator(context), items_(items_from(context, "RoundRobinGenerator")) {}

GeneratedValue RoundRobinGenerator::generate(const RuntimeArgs&) {
  if (items_.empty()) throw GeneratorError(std::string(kNoItemsMessage));
  const auto& item = items_[cursor_];
  cursor_ = (cursor_ + 1) % items_.size();
  return make_value(item_text(item));
}

RandomGenerator::RandomGenerator(const GeneratorContext& context)
    : Generator(context), items_(items_from(context, "RandomGenerator")) {
  if (const auto* seed = context.find("seed")) {
    if (!seed->is_number_integer()) {
      throw InvalidContext("RandomGenerator: context 'seed' must be an integer");
    }
    engine_.seed(static_cast<std::uint64_t>(seed->get<std::int64_t>()));
  } else {
    std::random_device entropy;
    engine_.seed((static_cast<std::uint64_t>(entropy()) << 32) | entropy());
  }
}

GeneratedValue RandomGenerator::generate(const RuntimeArgs&) {
  if (items_.empty()) throw GeneratorError(std::string(kNoItemsMessage));
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  return make_value(item_text(items_[pick(engine_)]));
}

LegacyGenerator::LegacyGenerator(const GeneratorContext& context,
                                 const GeneratorEnvironment& environment)
    : Generator(context), timeout_(environment.callout_timeout) {
  const auto* callout = context.find("callout");
  if (!callout) {
    throw InvalidContext("LegacyGenerator: context must contain \"callout\"");
  }
  if (!callout->is_string() || callout->get<std::string>().empty()) {
    throw InvalidContext("LegacyGenerator: \"callout\" must be a non-empty path");
  }
  executable_ = resolve_callout(callout->get<std::string>(), environment.plugin_dir);
  if (const auto* kwargs = context.find("kwargs")) {
    if (!kwargs->is_object()) {
      throw InvalidContext("LegacyGenerator: \"kwargs\" must be a map");
    }
    kwargs_ = *kwargs;
  } else {
    kwargs_ = nlohmann::json::object();
  }
}

LegacyGenerator::LegacyGenerator(const GeneratorContext& context,
                                 const GeneratorEnvironment& environment,
                                 const std::filesystem::path& executable)
    : Generator(context),
      executable_(executable),
      timeout_(environment.callout_timeout) {
  const auto* kwargs = context.find("kwargs");
  if (kwargs && !kwargs->is_object()) {
    throw InvalidContext("plugin generator: \"kwargs\" must be a map");
  }
  kwargs_ = kwargs ? *kwargs : nlohmann::json::object();
}

GeneratedValue LegacyGenerator::generate(const RuntimeArgs& args) {
  CalloutInvocation invocation;
  invocation.executable = executable_;
  invocation.context = context().entries();
  invocation.kwargs = kwargs_;
  invocation.args = args;
  invocation.timeout = timeout_;
  return run_callout(invocation);
}

HmacTokenGenerator::HmacTokenGenerator(const GeneratorContext& context,
                                       const GeneratorEnvironment& environment)
    : Generator(context),
      ttl_(3600),
      claims_(nlohmann::json::object()),
      clock_([environment] { return environment.now(); }) {
  const auto* key = context.find("key");
  if (!key || !key->is_string() || key->get<std::string>().empty()) {
    throw InvalidContext("HmacTokenGenerator: context must contain a \"key\"");
  }
  key_ = key->get<std::string>();
  if (const auto* ttl = context.find("ttl")) {
    if (!ttl->is_number_integer() || ttl->get<std::int64_t>() <= 0) {
      throw InvalidContext("HmacTokenGenerator: \"ttl\" must be a positive integer");
    }
    ttl_ = ttl->get<std::int64_t>();
  }
  if (const auto* claims = context.find("claims")) {
    if (!claims->is_object()) {
      throw InvalidContext("HmacTokenGenerator: \"claims\" must be a map");
    }
    claims_ = *claims;
  }
}

GeneratedValue HmacTokenGenerator::generate(const RuntimeArgs& args) {
  nlohmann::json claims = claims_;
  if (args.site_name && !claims.contains("aud")) claims["aud"] = *args.site_name;
  const EpochSeconds now = clock_();
  const auto token = issue_test_token(claims, key_, ttl_, now);
  return make_value(*token.string(), now + ttl_);
}

void register_builtin_generators(GeneratorRegistry& registry) {
  export_generator<RoundRobinGenerator>(registry, "RoundRobinGenerator");
  export_generator<RandomGenerator>(registry, "RandomGenerator");
  export_generator<LegacyGenerator>(registry, "LegacyGenerator");
  export_generator<HmacTokenGenerator>(registry, "HmacTokenGenerator");
}

}  // namespace credstack
