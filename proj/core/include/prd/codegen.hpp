/*
 * Copyright (C) 2026 The prd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// C source scaffolding around a decompiled function: the detour interface the
// trampoline jumps to, thunks for imported symbols, and the small amount of
// source clean-up needed before the decompiled text recompiles.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prd/detour.hpp"

namespace prd::codegen {

struct Parameter {
  std::string text;  // as written, e.g. "const char *s"
  std::string name;  // "s"
};

struct Prototype {
  std::string return_type;
  std::string name;
  std::vector<Parameter> parameters;
};

// Parses "ret name(params)". Every parameter must be named; "(void)" and "()"
// mean no parameters. Throws EmptyPrototype / InvalidPrototype.
Prototype parse_prototype(std::string_view text);

// Finds the definition of `function` in C source and returns its prototype
// text (everything from the start of the declaration up to the closing
// parenthesis).
std::optional<std::string> find_prototype(std::string_view source, std::string_view function);

struct InterfaceReference {
  std::string name;
  detour::ReferenceKind kind = detour::ReferenceKind::LocalFunction;
  // Functions: pointer type such as "int (*)(int)". Data: the object type.
  // Empty selects "void *(*)()" or "int".
  std::string c_type;
};

struct InterfaceSpec {
  std::string function;
  std::string return_type;
  std::vector<Parameter> parameters;
  std::vector<InterfaceReference> references;  // trampoline order
  bool ebx_required = true;
  detour::StackCorrection stack_correction;
};

InterfaceSpec interface_for(const detour::DetourPlan& plan, const Prototype& prototype);

// File-scope storage the interface assigns: the saved %ebx word and one
// pointer per reference (data references are also given an access macro).
std::string emit_reference_declarations(const InterfaceSpec& spec);

/// The det_<function> entry plus its stack fix-up stub. Parameters are the
/// %ebx word (when required), one void * per reference, then the original
/// parameters. Throws EmptyPrototype when the return type or name is empty.
std::string emit_detour_interface(const InterfaceSpec& spec);

/// Inline-assembly statement placed just before the interface returns. It
/// copies the return address `byte_shift` bytes up the stack and redirects
/// the return through `fixup_label`, which drops the added words. Empty for
/// a zero shift; MisalignedShift unless the shift is a multiple of 4.
std::string emit_stack_epilogue(const detour::StackCorrection& correction, std::string_view fixup_label);

// Top-level asm for the stub the epilogue returns through.
std::string emit_fixup_stub(const detour::StackCorrection& correction, std::string_view fixup_label);

// Placeholder immediate emitted in a thunk for `symbol`, and the symbol that
// marks the immediate's location in the linked payload.
std::uint32_t placeholder_for(std::string_view symbol) noexcept;
std::string placeholder_marker(std::string_view symbol);
inline constexpr std::string_view kPlaceholderMarkerPrefix = "prd_plt_imm_";
inline constexpr std::string_view kSavedEbxSymbol = "prd_saved_ebx";

/// Thunk named `symbol` that reloads the caller's %ebx and jumps to the
/// original binary's PLT stub. The stub address is a placeholder patched
/// when the payload is appended.
std::string emit_unbound_symbol_interface(std::string_view symbol, bool restore_ebx = true);

// Whole-token keyword substitutions applied to decompiled text.
using Substitutions = std::map<std::string, std::string, std::less<>>;

const Substitutions& default_substitutions();
// {"from": "to", ...}; keys must be identifiers.
Substitutions substitutions_from_json(std::string_view text);

// Replaces identifier tokens found in `table`. String and character literals
// and comments are left alone.
std::string normalize_decompiled_source(std::string_view text, const Substitutions& table = default_substitutions());

struct TypeDefinition {
  std::string name;  // e.g. "struct node"
  std::string body;  // complete definition text
  std::set<std::string> dependencies;
  std::string forward_declaration;  // empty selects "<name>;"
};

struct OrderedDefinition {
  enum class Kind { ForwardDeclaration, Body };
  Kind kind = Kind::Body;
  std::string name;
  std::string text;
};

/// Dependencies first, ties by name. Members of a dependency cycle get
/// forward declarations ahead of all their bodies. Names in `external` are
/// assumed to be declared elsewhere; any other unknown dependency throws
/// UnresolvedDependency.
std::vector<OrderedDefinition> order_type_definitions(const std::vector<TypeDefinition>& defs,
                                                      const std::set<std::string>& external = {});

// [{"name", "body", "deps": [...], "forward"?}]
std::vector<TypeDefinition> type_definitions_from_json(std::string_view text);

struct PayloadSource {
  InterfaceSpec interface;
  std::vector<std::string> imports;  // symbols reached through unbound-symbol thunks
  std::vector<TypeDefinition> types;
  std::string decompiled;            // already normalized
};

// One translation unit: types, reference storage, thunks, decompiled code,
// detour interface.
std::string emit_payload_source(const PayloadSource& source);

}  // namespace prd::codegen
