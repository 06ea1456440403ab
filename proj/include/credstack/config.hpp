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

// Credential and parameter declarations.
//
//   <credential absfname="RoundRobinGenerator" purpose="payload"
//       security_class="frontend" trust_domain="grid"
//       context="{'items': ['str1', 'str2', 'str3'], 'type': 'text'}"
//       type="generator"/>
//   <parameter name="VMId" value="RoundRobinGenerator"
//       context="{'items': ['vm1', 'vm2', 'vm3'], 'type': 'string'}"
//       type="generator"/>
//
// <credential> and <parameter> elements are collected at any depth; all
// other elements are ignored.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credstack/credential.hpp"
#include "credstack/generators.hpp"
#include "credstack/markup.hpp"
#include "credstack/parameters.hpp"

namespace credstack {

enum class CredentialDeclType { File, Generator };
enum class ParameterDeclType { Literal, Generator };

struct CredentialDecl {
  std::string absfname;  // file path, or generator name
  Purpose purpose = Purpose::Request;
  std::string security_class;
  std::string trust_domain;
  CredentialDeclType decl_type = CredentialDeclType::File;
  std::optional<GeneratorContext> context;
  // Set when "type" names a credential kind (e.g. type="scitoken") instead of
  // "file"/"generator"; overrides extension-based classification.
  std::optional<CredentialKind> kind_hint;
  std::map<std::string, std::string> extra_attributes;
  SourceLocation location;

  // Location is not part of the declaration's identity.
  bool operator==(const CredentialDecl& other) const;
};

struct ParameterDecl {
  std::string name;
  std::string value;  // literal, or generator name
  ParameterDeclType decl_type = ParameterDeclType::Literal;
  ParameterType ptype = ParameterType::String;
  std::optional<GeneratorContext> context;
  std::map<std::string, std::string> extra_attributes;
  SourceLocation location;

  bool operator==(const ParameterDecl& other) const;
};

struct ConfigDocument {
  std::vector<CredentialDecl> credentials;
  std::vector<ParameterDecl> parameters;
  std::vector<std::string> warnings;
};

// Throws MarkupError for malformed markup and DeclError (with the element
// and its line:column) for invalid declarations.
ConfigDocument parse_config(std::string_view text);

CredentialDecl parse_credential_element(const MarkupElement& element,
                                        std::vector<std::string>& warnings);
ParameterDecl parse_parameter_element(const MarkupElement& element,
                                      std::vector<std::string>& warnings);

// Renders declarations back to markup, contexts in single-quoted literal form.
std::string serialize_config(const ConfigDocument& document);

// "credential 'RoundRobinGenerator' at 3:1"
std::string describe(const CredentialDecl& decl);
std::string describe(const ParameterDecl& decl);

// A resolved credential declaration: either a loaded file or a generator
// handle, plus the metadata to stamp on produced credentials.
struct CredentialSource {
  CredentialDecl decl;
  CredentialMetadata metadata;
  std::optional<Credential> file_credential;
  std::shared_ptr<GeneratorHandle> generator;

  // File sources return the loaded credential; generator sources generate a
  // fresh one whose kind follows the generated type tag (Generic when the
  // tag is not a credential kind).
  Credential obtain(const RuntimeArgs& args) const;
};

struct ResolvedConfig {
  std::vector<CredentialSource> credentials;
  std::vector<Parameter> parameters;
};

// Errors are rethrown with the declaration location prepended.
CredentialSource resolve_credential_decl(const CredentialDecl& decl,
                                         const GeneratorRegistry& registry,
                                         const GeneratorEnvironment& environment);
Parameter resolve_parameter_decl(const ParameterDecl& decl,
                                 const GeneratorRegistry& registry,
                                 const GeneratorEnvironment& environment);

// plugin_dir, when given, replaces the registry environment's plugin dir.
ResolvedConfig resolve_decls(const ConfigDocument& document,
                             const GeneratorRegistry& registry,
                             std::optional<std::filesystem::path> plugin_dir = {});

CredentialKind kind_for_type_tag(std::string_view type_tag);

}  // namespace credstack
