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

#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "credstack/config.hpp"
#include "credstack/context_literal.hpp"
#include "credstack/credential.hpp"
#include "credstack/error.hpp"
#include "credstack/generators.hpp"
#include "credstack/lifecycle.hpp"
#include "credstack/markup.hpp"
#include "json.hpp"

namespace credstack::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  bool json = false;
  std::optional<EpochSeconds> now;
  std::string plugin_dir;
  int timeout_seconds = 30;

  std::string path;

  std::string generator;
  std::string context;
  std::string site;
  std::string trust_domain;
  std::string purpose;
  int count = 1;

  std::string store_dir;
  bool once = false;
  std::optional<std::int64_t> threshold;
  std::int64_t min_interval = 0;
};

class Session {
 public:
  Session(const Options& options, std::ostream& out, std::ostream& err)
      : options_(options), out_(out), err_(err) {}

  int inspect();
  int validate();
  int generate();
  int renew();
  int config_check();

 private:
  EpochSeconds now() const {
    if (options_.now) return *options_.now;
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }

  GeneratorEnvironment environment() const {
    GeneratorEnvironment env;
    env.plugin_dir = options_.plugin_dir;
    env.callout_timeout = std::chrono::seconds(options_.timeout_seconds);
    const EpochSeconds fixed = now();
    if (options_.now) env.clock = [fixed] { return fixed; };
    return env;
  }

  // Registry with the built-ins and this session's plugin directory.
  std::unique_ptr<GeneratorRegistry> registry() const {
    auto registry = std::make_unique<GeneratorRegistry>(environment());
    register_builtin_generators(*registry);
    return registry;
  }

  RuntimeArgs runtime_args() const;

  int fail(const char* command, int code, const std::string& message) {
    err_ << "credstack " << command << ": " << message << '\n';
    if (options_.json) {
      out_ << json{{"command", command}, {"ok", false}, {"error", message}}.dump()
           << '\n';
    }
    return code;
  }

  const Options& options_;
  std::ostream& out_;
  std::ostream& err_;
};

std::string iso8601(EpochSeconds t) {
  const std::time_t tt = static_cast<std::time_t>(t);
  std::tm tm{};
  if (!::gmtime_r(&tt, &tm)) return std::to_string(t);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

json optional_json(const std::optional<std::string>& value) {
  return value ? json(*value) : json();
}

json validity_json(const ValidityReport& report) {
  return {{"ok", report.ok()},
          {"structurally_valid", report.structurally_valid},
          {"not_expired", report.not_expired},
          {"not_before_ok", report.not_before_ok},
          {"seconds_remaining",
           report.seconds_remaining ? json(*report.seconds_remaining) : json()},
          {"problems", report.problems}};
}

// Metadata recorded for `path` in a store index next to it, if any.
CredentialMetadata recorded_metadata(const fs::path& path) {
  CredentialMetadata metadata;
  metadata.source = Source::file(path);
  const fs::path index = path.parent_path() / "index.json";
  std::error_code ec;
  if (!fs::is_regular_file(index, ec)) return metadata;
  try {
    const json parsed = json::parse(read_file(index));
    for (const auto& entry : parsed.at("entries")) {
      if (entry.value("file", "") != path.filename().string()) continue;
      if (entry.contains("purpose") && entry["purpose"].is_string()) {
        metadata.purpose = purpose_from_string(entry["purpose"].get<std::string>());
      }
      if (entry.contains("trust_domain") && entry["trust_domain"].is_string()) {
        metadata.trust_domain = entry["trust_domain"].get<std::string>();
      }
      if (entry.contains("security_class") && entry["security_class"].is_string()) {
        metadata.security_class = entry["security_class"].get<std::string>();
      }
      break;
    }
  } catch (const std::exception&) {
    // A damaged index only loses the optional metadata.
  }
  return metadata;
}

// Derived attributes for the report. Malformed payloads yield no attributes;
// the validity section explains why.
json derived_attributes(const Credential& credential) {
  json attributes = json::object();
  try {
    const auto p = payload(credential);
    if (!p) return attributes;
    if (const auto* claims = std::get_if<TokenClaims>(&*p)) {
      attributes["sub"] = optional_json(claims->sub());
      attributes["scope"] = optional_json(claims->scope());
      attributes["iss"] = optional_json(claims->iss());
      const auto exp = claims->exp();
      attributes["exp"] = exp ? json(iso8601(*exp)) : json();
    } else if (const auto* bundle = std::get_if<PemBundle>(&*p)) {
      attributes["blocks"] = bundle->blocks.size();
      if (const auto* cert = bundle->leaf_certificate()) {
        attributes["subject"] = cert->subject;
        attributes["issuer"] = cert->issuer;
        attributes["serial"] = cert->serial_hex;
        attributes["not_before"] = iso8601(cert->not_before);
        attributes["exp"] = iso8601(cert->not_after);
      }
    }
  } catch (const Error&) {
  }
  return attributes;
}

void print_attributes(std::ostream& out, const json& attributes) {
  for (const auto& [name, value] : attributes.items()) {
    if (value.is_null()) continue;
    out << name << ": " << (value.is_string() ? value.get<std::string>() : value.dump())
        << '\n';
  }
}

void print_validity(std::ostream& out, const ValidityReport& report) {
  out << "valid: " << (report.ok() ? "yes" : "no") << '\n';
  if (report.seconds_remaining) {
    out << "seconds_remaining: " << *report.seconds_remaining << '\n';
  }
  for (const auto& problem : report.problems) out << "problem: " << problem << '\n';
}

RuntimeArgs Session::runtime_args() const {
  RuntimeArgs args;
  if (!options_.site.empty()) args.site_name = options_.site;
  if (!options_.trust_domain.empty()) args.trust_domain = options_.trust_domain;
  if (!options_.purpose.empty()) {
    const auto purpose = purpose_from_string(options_.purpose);
    if (!purpose) throw std::invalid_argument("unknown purpose '" + options_.purpose + "'");
    args.purpose = *purpose;
  }
  return args;
}

int Session::inspect() {
  const fs::path path(options_.path);
  Credential credential;
  try {
    credential = load_credential_file(path, recorded_metadata(path));
  } catch (const Error& e) {
    return fail("inspect", kExitUsage, e.what());
  }
  const ValidityReport report = credstack::validate(credential, now());
  const json attributes = derived_attributes(credential);

  if (options_.json) {
    out_ << json{{"command", "inspect"},
                 {"ok", true},
                 {"path", path.string()},
                 {"kind", std::string(to_string(credential.kind()))},
                 {"purpose", credential.purpose()
                                 ? json(std::string(to_string(*credential.purpose())))
                                 : json()},
                 {"trust_domain", optional_json(credential.trust_domain())},
                 {"attributes", attributes},
                 {"validity", validity_json(report)}}
                .dump()
         << '\n';
    return kExitOk;
  }
  out_ << "path: " << path.string() << '\n';
  out_ << "kind: " << to_string(credential.kind()) << '\n';
  if (credential.purpose()) out_ << "purpose: " << to_string(*credential.purpose()) << '\n';
  if (credential.trust_domain()) out_ << "trust_domain: " << *credential.trust_domain() << '\n';
  print_attributes(out_, attributes);
  print_validity(out_, report);
  return kExitOk;
}

int Session::validate() {
  const fs::path path(options_.path);
  ValidityReport report;
  std::optional<CredentialKind> kind;
  try {
    const Credential credential = load_credential_file(path);
    kind = credential.kind();
    report = credstack::validate(credential, now());
  } catch (const StorageError& e) {
    return fail("validate", kExitUsage, e.what());
  } catch (const Error& e) {
    // Readable but not any known credential format.
    report.problems.push_back(std::string("structure: ") + e.what());
  }

  const int code = report.ok() ? kExitOk : kExitFailure;
  if (options_.json) {
    out_ << json{{"command", "validate"},
                 {"ok", report.ok()},
                 {"path", path.string()},
                 {"kind", kind ? json(std::string(to_string(*kind))) : json()},
                 {"validity", validity_json(report)}}
                .dump()
         << '\n';
  } else {
    out_ << path.string() << ": " << (report.ok() ? "valid" : "invalid") << '\n';
    for (const auto& problem : report.problems) out_ << "problem: " << problem << '\n';
  }
  for (const auto& problem : report.problems) err_ << path.string() << ": " << problem << '\n';
  return code;
}

int Session::generate() {
  std::unique_ptr<GeneratorRegistry> reg;
  std::optional<GeneratorHandle> handle;
  RuntimeArgs args;
  try {
    args = runtime_args();
    const GeneratorContext context = parse_context_literal(options_.context);
    reg = registry();
    handle.emplace(reg->load_generator(options_.generator, context.entries()));
  } catch (const std::invalid_argument& e) {
    return fail("generate", kExitUsage, e.what());
  } catch (const Error& e) {
    // Unknown generator, malformed or incomplete context, missing callout.
    return fail("generate", kExitUsage, e.what());
  }

  json values = json::array();
  std::vector<GeneratedValue> generated;
  try {
    for (int i = 0; i < options_.count; ++i) generated.push_back(handle->generate(args));
  } catch (const Error& e) {
    return fail("generate", kExitFailure, e.what());
  }

  if (options_.json) {
    for (const auto& value : generated) {
      values.push_back({{"type", value.type_tag},
                        {"value", value.value},
                        {"expiry", value.expiry ? json(*value.expiry) : json()}});
    }
    json report = {{"command", "generate"},
                   {"ok", true},
                   {"generator", options_.generator},
                   {"type", generated.front().type_tag},
                   {"value", generated.front().value},
                   {"expiry", generated.front().expiry ? json(*generated.front().expiry)
                                                       : json()}};
    if (options_.count > 1) report["values"] = values;
    out_ << report.dump() << '\n';
  } else {
    for (const auto& value : generated) out_ << value.value << '\n';
  }
  return kExitOk;
}

int Session::renew() {
  RenewalPolicy policy;
  policy.threshold_seconds = options_.threshold;
  policy.min_interval_seconds = options_.min_interval;
  RuntimeArgs args;
  std::unique_ptr<CredentialStore> store;
  try {
    policy.check();
    args = runtime_args();
    store = std::make_unique<CredentialStore>(options_.store_dir);
  } catch (const std::invalid_argument& e) {
    return fail("renew", kExitUsage, e.what());
  } catch (const Error& e) {
    return fail("renew", kExitUsage, e.what());
  }

  auto reg = registry();
  for (const auto& [id, message] : store->attach_renewers(*reg)) {
    err_ << "credstack renew: renewer for " << id << ": " << message << '\n';
  }
  const TickReport report = store->tick(now(), policy, args);
  for (const auto& [id, message] : report.failed) {
    err_ << "credstack renew: " << id << ": " << message << '\n';
  }

  if (options_.json) {
    json out = report.to_json();
    out["command"] = "renew";
    out["ok"] = report.ok();
    out["store_dir"] = options_.store_dir;
    out["counts"] = {{"renewed", report.renewed.size()},
                     {"skipped", report.skipped.size()},
                     {"failed", report.failed.size()}};
    out_ << out.dump() << '\n';
  } else {
    out_ << "renewed: " << report.renewed.size() << '\n';
    out_ << "skipped: " << report.skipped.size() << '\n';
    out_ << "failed: " << report.failed.size() << '\n';
    for (const auto& id : report.renewed) out_ << "  renewed " << id << '\n';
    for (const auto& [id, reason] : report.skipped) {
      out_ << "  skipped " << id << ": " << reason << '\n';
    }
    for (const auto& [id, message] : report.failed) {
      out_ << "  failed " << id << ": " << message << '\n';
    }
  }
  return report.ok() ? kExitOk : kExitFailure;
}

struct DeclResult {
  std::string element;
  std::string name;
  std::string location;
  bool ok = true;
  std::string message;
};

void check_element(const MarkupElement& element, const GeneratorRegistry& registry,
                   const GeneratorEnvironment& environment,
                   std::vector<DeclResult>& results,
                   std::vector<std::string>& warnings) {
  if (element.name == "credential" || element.name == "parameter") {
    DeclResult result;
    result.element = element.name;
    const char* key = element.name == "credential" ? "absfname" : "name";
    if (const auto* name = element.attribute(key)) result.name = *name;
    result.location = element.location.to_string();
    try {
      if (element.name == "credential") {
        resolve_credential_decl(parse_credential_element(element, warnings), registry,
                                environment);
      } else {
        resolve_parameter_decl(parse_parameter_element(element, warnings), registry,
                               environment);
      }
    } catch (const Error& e) {
      result.ok = false;
      result.message = e.what();
    }
    results.push_back(std::move(result));
  }
  for (const auto& child : element.children) {
    check_element(child, registry, environment, results, warnings);
  }
}

int Session::config_check() {
  std::string text;
  try {
    text = read_file(options_.path);
  } catch (const Error& e) {
    return fail("config-check", kExitUsage, e.what());
  }

  std::vector<MarkupElement> elements;
  try {
    elements = parse_markup(text);
  } catch (const MarkupError& e) {
    return fail("config-check", kExitFailure, options_.path + ": " + e.what());
  }

  auto reg = registry();
  const GeneratorEnvironment env = environment();
  std::vector<DeclResult> results;
  std::vector<std::string> warnings;
  for (const auto& element : elements) check_element(element, *reg, env, results, warnings);

  bool all_ok = true;
  for (const auto& result : results) all_ok = all_ok && result.ok;

  if (options_.json) {
    json decls = json::array();
    for (const auto& result : results) {
      decls.push_back({{"element", result.element},
                       {"name", result.name},
                       {"location", result.location},
                       {"status", result.ok ? "ok" : "error"},
                       {"message", result.ok ? json() : json(result.message)}});
    }
    out_ << json{{"command", "config-check"},
                 {"ok", all_ok},
                 {"path", options_.path},
                 {"declarations", decls},
                 {"warnings", warnings}}
                .dump()
         << '\n';
  } else {
    for (const auto& result : results) {
      if (result.ok) {
        out_ << "OK    <" << result.element << "> '" << result.name << "' at "
             << result.location << '\n';
      } else {
        out_ << "ERROR " << result.message << '\n';
      }
    }
  }
  for (const auto& warning : warnings) err_ << "warning: " << warning << '\n';
  for (const auto& result : results) {
    if (!result.ok) err_ << "credstack config-check: " << result.message << '\n';
  }
  return all_ok ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options options;
  if (const char* dir = std::getenv("CREDSTACK_PLUGIN_DIR")) options.plugin_dir = dir;

  CLI::App app{"credstack: inspect, validate, generate and renew credentials"};
  app.name("credstack");
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.add_flag("--json", options.json, "Print one JSON object on stdout");
  app.add_option("--now", options.now, "Evaluate times at this epoch second");
  app.add_option("--plugin-dir", options.plugin_dir,
                 "Directory of callout executables (default $CREDSTACK_PLUGIN_DIR)");
  app.add_option("--timeout", options.timeout_seconds, "Callout timeout in seconds")
      ->check(CLI::PositiveNumber);

  auto* inspect = app.add_subcommand("inspect", "Describe a credential file");
  inspect->add_option("path", options.path, "Credential file")->required();

  auto* validate = app.add_subcommand("validate", "Check structure and validity window");
  validate->add_option("path", options.path, "Credential file")->required();

  auto* generate = app.add_subcommand("generate", "Run a generator and print its value");
  generate->add_option("--generator,-g", options.generator, "Generator name")->required();
  generate->add_option("--context,-c", options.context, "Context map literal")->required();
  generate->add_option("--site", options.site, "Site name passed to the generator");
  generate->add_option("--trust-domain", options.trust_domain, "Trust domain");
  generate->add_option("--purpose", options.purpose, "request, payload or callback");
  generate->add_option("--count,-n", options.count, "Number of values to generate")
      ->check(CLI::PositiveNumber);

  auto* renew = app.add_subcommand("renew", "Run one renewal pass over a store");
  renew->add_option("--store-dir", options.store_dir, "Store directory")->required();
  renew->add_flag("--once", options.once, "Run a single pass (the only mode)");
  renew->add_option("--threshold", options.threshold,
                    "Renew when fewer seconds remain (default: a third of the lifetime)");
  renew->add_option("--min-interval", options.min_interval,
                    "Skip entries renewed less than this many seconds ago");
  renew->add_option("--site", options.site, "Site name passed to renewers");

  auto* config_check =
      app.add_subcommand("config-check", "Parse and resolve a declaration file");
  config_check->add_option("path", options.path, "Declaration file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  Session session(options, out, err);
  try {
    if (inspect->parsed()) return session.inspect();
    if (validate->parsed()) return session.validate();
    if (generate->parsed()) return session.generate();
    if (renew->parsed()) return session.renew();
    return session.config_check();
  } catch (const std::exception& e) {
    err << "credstack: " << e.what() << '\n';
    return kExitUsage;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace credstack::cli
