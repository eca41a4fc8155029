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

// Detouring with references: the trampoline written over a function's entry
// pushes the addresses the replacement code needs (plus the caller's %ebx)
// and jumps to the detour interface in the appended payload.
//
// Stack at detour-interface entry, lowest address first:
//
//   [return][ebx][ref_1] ... [ref_r][original arguments]

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prd/elf.hpp"

namespace prd::detour {

enum class ReferenceKind { LocalFunction, LocalData, PltStub };

std::string_view to_string(ReferenceKind kind) noexcept;
ReferenceKind reference_kind_from_string(std::string_view text);

struct ReferenceSpec {
  std::string name;
  ReferenceKind kind = ReferenceKind::LocalFunction;
  elf::Address address = 0;

  bool operator==(const ReferenceSpec&) const = default;
};

struct CallScan {
  std::map<std::string, ReferenceSpec, std::less<>> callees;
  std::size_t indirect_count = 0;
  // E8 targets that hit neither a symbol nor a PLT stub.
  std::vector<elf::Address> unresolved_targets;
};

// Linear sweep over the function body, bounded by its symbol size.
CallScan scan_direct_calls(const elf::ElfImage& image, const elf::SymbolEntry& function);

using CallGraph = std::map<std::string, std::set<std::string>, std::less<>>;

/// Callees reachable from `entries`, in breadth-first discovery order
/// (siblings by name), excluding the entries themselves.
std::vector<std::string> required_references(const CallGraph& graph, const std::set<std::string>& entries);

// Nominal byte cost of detouring with r references: 7r + 4.
std::uint64_t paper_byte_cost(std::uint64_t r) noexcept;

// Length of encode_trampoline's output: 5r + 8 with the %ebx push, 5r + 7 without.
std::uint64_t encoded_length(std::uint64_t r, bool ebx_required) noexcept;

struct StackCorrection {
  std::size_t added_words = 0;
  std::size_t byte_shift = 0;
};

StackCorrection stack_correction(std::size_t reference_count, bool ebx_required) noexcept;

struct DetourPlan {
  elf::SymbolEntry function;
  std::vector<ReferenceSpec> references;
  bool ebx_required = true;
  std::uint32_t budget_bytes = 0;
  std::uint64_t paper_cost = 0;
  std::uint64_t encoded_cost = 0;
  std::string payload_symbol;
  std::uint32_t payload_offset = 0;  // filled in once the payload is known

  bool fits() const noexcept { return encoded_cost <= budget_bytes; }
  StackCorrection correction() const noexcept { return stack_correction(references.size(), ebx_required); }
};

/// Trampoline bytes for `plan`, to be written at plan.function.address:
///
///   58                pop  %eax          ; return address
///   68 <ref_i>        push $ref_i        ; i = r .. 1
///   53                push %ebx          ; only when ebx_required
///   50                push %eax
///   E9 <rel32>        jmp  detour_target
std::vector<std::uint8_t> encode_trampoline(const DetourPlan& plan, elf::Address detour_target);

struct PlanOptions {
  // Explicit reference names, used verbatim; nullopt scans the body.
  std::optional<std::vector<std::string>> references;
  bool ebx_required = true;
};

DetourPlan plan_detour(const elf::ElfImage& image, std::string_view function_name, std::string_view payload_symbol,
                       const PlanOptions& options = {});

// Resolves one reference by name: a defined .symtab symbol first, then a PLT stub.
ReferenceSpec resolve_reference(const elf::ElfImage& image, std::string_view name);

// {"function", "refs": [{"name", "kind", "addr"}], "ebx", "budget",
//  "paper_cost", "encoded_cost", "payload_symbol"}
std::string to_json(const DetourPlan& plan);
DetourPlan plan_from_json(std::string_view text);

}  // namespace prd::detour
