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

#include "credstack/config.hpp"

#include <set>

#include "credstack/context_literal.hpp"
#include "credstack/error.hpp"

namespace credstack {
namespace {

const std::set<std::string, std::less<>> kCredentialAttributes = {
    "absfname", "purpose", "security_class", "trust_domain", "context", "type"};
const std::set<std::string, std::less<>> kParameterAttributes = {
    "name", "value", "context", "type"};

std::string element_label(const MarkupElement& element) {
  std::string label = "<" + element.name + ">";
  const char* key = element.name == "credential" ? "absfname" : "name";
  if (const auto* id = element.attribute(key)) label += " '" + *id + "'";
  return label + " at " + element.location.to_string();
}

[[noreturn]] void decl_error(const MarkupElement& element,
                             const std::string& attribute,
                             const std::string& what) {
  std::string message = element_label(element);
  if (!attribute.empty()) message += ": attribute '" + attribute + "'";
  throw DeclError(message + ": " + what);
}

const std::string& required(const MarkupElement& element, const char* name) {
  const auto* value = element.attribute(name);
  if (!value) decl_error(element, name, "required attribute is missing");
  if (value->empty()) decl_error(element, name, "must not be empty");
  return *value;
}

std::optional<GeneratorContext> read_context(const MarkupElement& element,
                                             bool needed) {
  const auto* text = element.attribute("context");
  if (!text) {
    if (needed) {
      decl_error(element, "context",
                 "generator declarations need a context with the \"type\" key");
    }
    return std::nullopt;
  }
  try {
    return parse_context_literal(*text);
  } catch (const Error& e) {
    decl_error(element, "context", e.what());
  }
}

std::map<std::string, std::string> collect_extras(
    const MarkupElement& element,
    const std::set<std::string, std::less<>>& known,
    std::vector<std::string>& warnings) {
  std::map<std::string, std::string> extras;
  for (const auto& [name, value] : element.attributes) {
    if (known.contains(name)) continue;
    warnings.push_back(element_label(element) + ": unknown attribute '" + name +
                       "' preserved");
    extras.emplace(name, value);
  }
  return extras;
}

void collect(const MarkupElement& element, ConfigDocument& document) {
  if (element.name == "credential") {
    document.credentials.push_back(
        parse_credential_element(element, document.warnings));
  } else if (element.name == "parameter") {
    document.parameters.push_back(
        parse_parameter_element(element, document.warnings));
  }
  for (const auto& child : element.children) collect(child, document);
}

void append_attribute(std::string& out, std::string_view name,
                      std::string_view value) {
  out += "\n    ";
  out += name;
  out += "=\"";
  out += escape_attribute(value);
  out += '"';
}

template <typename Fn>
auto with_location(const SourceLocation& location, const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (Error& e) {
    e.add_context(what + " at " + location.to_string());
    throw;
  }
}

}  // namespace

bool CredentialDecl::operator==(const CredentialDecl& other) const {
  return absfname == other.absfname && purpose == other.purpose &&
         security_class == other.security_class &&
         trust_domain == other.trust_domain && decl_type == other.decl_type &&
         context == other.context && kind_hint == other.kind_hint &&
         extra_attributes == other.extra_attributes;
}

bool ParameterDecl::operator==(const ParameterDecl& other) const {
  return name == other.name && value == other.value &&
         decl_type == other.decl_type && ptype == other.ptype &&
         context == other.context && extra_attributes == other.extra_attributes;
}

CredentialDecl parse_credential_element(const MarkupElement& element,
                                        std::vector<std::string>& warnings) {
  CredentialDecl decl;
  decl.location = element.location;
  decl.absfname = required(element, "absfname");

  const std::string& purpose = required(element, "purpose");
  const auto parsed_purpose = purpose_from_string(purpose);
  if (!parsed_purpose) {
    decl_error(element, "purpose",
               "unknown purpose '" + purpose +
                   "' (expected request, payload or callback)");
  }
  decl.purpose = *parsed_purpose;

  if (const auto* v = element.attribute("security_class")) decl.security_class = *v;
  if (const auto* v = element.attribute("trust_domain")) decl.trust_domain = *v;

  const auto* type = element.attribute("type");
  if (!type || *type == "file") {
    decl.decl_type = CredentialDeclType::File;
  } else if (*type == "generator") {
    decl.decl_type = CredentialDeclType::Generator;
  } else if (const auto kind = kind_from_string(*type)) {
    decl.decl_type = CredentialDeclType::File;
    decl.kind_hint = *kind;
  } else {
    decl_error(element, "type",
               "unknown declaration type '" + *type +
                   "' (expected file, generator or a credential kind)");
  }

  decl.context =
      read_context(element, decl.decl_type == CredentialDeclType::Generator);
  decl.extra_attributes = collect_extras(element, kCredentialAttributes, warnings);
  return decl;
}

ParameterDecl parse_parameter_element(const MarkupElement& element,
                                      std::vector<std::string>& warnings) {
  ParameterDecl decl;
  decl.location = element.location;
  decl.name = required(element, "name");
  const auto* value = element.attribute("value");
  if (!value) decl_error(element, "value", "required attribute is missing");
  decl.value = *value;

  const auto* type = element.attribute("type");
  if (type && *type == "generator") {
    decl.decl_type = ParameterDeclType::Generator;
    if (decl.value.empty()) decl_error(element, "value", "generator name is empty");
    decl.context = read_context(element, true);
    if (auto ptype = parameter_type_from_string(decl.context->type())) {
      decl.ptype = *ptype;
    }
  } else {
    decl.decl_type = ParameterDeclType::Literal;
    if (type) {
      const auto ptype = parameter_type_from_string(*type);
      if (!ptype) {
        decl_error(element, "type",
                   "unknown parameter type '" + *type +
                       "' (expected generator, integer, string or expression)");
      }
      decl.ptype = *ptype;
    }
    decl.context = read_context(element, false);
    if (decl.ptype == ParameterType::Integer) {
      try {
        parse_integer(decl.value);
      } catch (const Error& e) {
        decl_error(element, "value", e.what());
      }
    }
  }
  decl.extra_attributes = collect_extras(element, kParameterAttributes, warnings);
  return decl;
}

ConfigDocument parse_config(std::string_view text) {
  ConfigDocument document;
  for (const auto& element : parse_markup(text)) collect(element, document);
  return document;
}

std::string serialize_config(const ConfigDocument& document) {
  std::string out;
  for (const auto& decl : document.credentials) {
    out += "<credential";
    append_attribute(out, "absfname", decl.absfname);
    append_attribute(out, "purpose", to_string(decl.purpose));
    append_attribute(out, "security_class", decl.security_class);
    append_attribute(out, "trust_domain", decl.trust_domain);
    if (decl.context) {
      append_attribute(out, "context", to_context_literal(decl.context->entries()));
    }
    std::string type = decl.decl_type == CredentialDeclType::Generator ? "generator"
                                                                       : "file";
    if (decl.kind_hint) type = to_string(*decl.kind_hint);
    append_attribute(out, "type", type);
    for (const auto& [name, value] : decl.extra_attributes) {
      append_attribute(out, name, value);
    }
    out += "\n/>\n";
  }
  for (const auto& decl : document.parameters) {
    out += "<parameter";
    append_attribute(out, "name", decl.name);
    append_attribute(out, "value", decl.value);
    if (decl.context) {
      append_attribute(out, "context", to_context_literal(decl.context->entries()));
    }
    append_attribute(out, "type", decl.decl_type == ParameterDeclType::Generator
                                      ? std::string_view("generator")
                                      : to_string(decl.ptype));
    for (const auto& [name, value] : decl.extra_attributes) {
      append_attribute(out, name, value);
    }
    out += "\n/>\n";
  }
  return out;
}

std::string describe(const CredentialDecl& decl) {
  return "credential '" + decl.absfname + "' at " + decl.location.to_string();
}

std::string describe(const ParameterDecl& decl) {
  return "parameter '" + decl.name + "' at " + decl.location.to_string();
}

CredentialKind kind_for_type_tag(std::string_view type_tag) {
  const auto kind = kind_from_string(type_tag);
  if (!kind || is_pair_kind(*kind)) return CredentialKind::Generic;
  return *kind;
}

Credential CredentialSource::obtain(const RuntimeArgs& args) const {
  if (file_credential) return *file_credential;
  const GeneratedValue generated = generator->generate(args);
  return Credential(generated.value, kind_for_type_tag(generated.type_tag),
                    metadata);
}

CredentialSource resolve_credential_decl(const CredentialDecl& decl,
                                         const GeneratorRegistry& registry,
                                         const GeneratorEnvironment& environment) {
  return with_location(decl.location, "credential '" + decl.absfname + "'", [&] {
    CredentialSource source;
    source.decl = decl;
    source.metadata.purpose = decl.purpose;
    if (!decl.trust_domain.empty()) source.metadata.trust_domain = decl.trust_domain;
    if (!decl.security_class.empty()) {
      source.metadata.security_class = decl.security_class;
    }

    if (decl.decl_type == CredentialDeclType::Generator) {
      source.metadata.source = Source::generator(decl.absfname);
      source.generator = std::make_shared<GeneratorHandle>(registry.load_generator(
          decl.absfname, decl.context->entries(), environment));
      return source;
    }

    const std::filesystem::path path(decl.absfname);
    source.metadata.source = Source::file(path);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) {
      throw ResolveError("credential file " + path.string() + " does not exist");
    }
    if (decl.kind_hint && !is_pair_kind(*decl.kind_hint)) {
      source.file_credential =
          Credential(read_file(path), *decl.kind_hint, source.metadata);
    } else {
      source.file_credential = load_credential_file(path, source.metadata);
    }
    return source;
  });
}

Parameter resolve_parameter_decl(const ParameterDecl& decl,
                                 const GeneratorRegistry& registry,
                                 const GeneratorEnvironment& environment) {
  return with_location(decl.location, "parameter '" + decl.name + "'", [&] {
    if (decl.decl_type == ParameterDeclType::Literal) {
      return Parameter::literal(decl.name, decl.ptype, decl.value);
    }
    auto handle = std::make_shared<GeneratorHandle>(
        registry.load_generator(decl.value, decl.context->entries(), environment));
    return Parameter::generated(decl.name, decl.ptype, std::move(handle));
  });
}

ResolvedConfig resolve_decls(const ConfigDocument& document,
                             const GeneratorRegistry& registry,
                             std::optional<std::filesystem::path> plugin_dir) {
  GeneratorEnvironment environment = registry.environment();
  if (plugin_dir) environment.plugin_dir = *plugin_dir;

  ResolvedConfig resolved;
  for (const auto& decl : document.credentials) {
    resolved.credentials.push_back(
        resolve_credential_decl(decl, registry, environment));
  }
  for (const auto& decl : document.parameters) {
    resolved.parameters.push_back(
        resolve_parameter_decl(decl, registry, environment));
  }
  return resolved;
}

}  // namespace credstack
