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

#include "prd/rewrite.hpp"

#include <array>
#include <map>

#include "prd/codegen.hpp"
#include "prd/error.hpp"
#include "prd/recompile.hpp"

namespace prd::rewrite {
namespace {

std::uint32_t load32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::array<std::uint8_t, 4> le32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v >> 16),
          static_cast<std::uint8_t>(v >> 24)};
}

}  // namespace

RewriteResult rewrite(const elf::ElfImage& original, std::span<const std::uint8_t> payload,
                      const detour::DetourPlan& plan) {
  detour::DetourPlan resolved = plan;
  resolved.function = elf::find_symbol(original, plan.function.name);
  if (!resolved.function.defined) throw Error(Errc::SymbolNotFound, plan.function.name + " is undefined");
  if (original.is_pie()) throw Error(Errc::UnsupportedPie, "detouring requires a non-PIE executable");
  resolved.budget_bytes = resolved.function.size_bytes;
  for (const auto& ref : plan.references) {
    const auto now = detour::resolve_reference(original, ref.name);
    if (now.address != ref.address) {
      throw Error(Errc::MalformedPlan, "reference " + ref.name + " does not match this binary");
    }
  }

  recompile::PayloadReport report;
  try {
    report = recompile::validate_payload(payload);
  } catch (const Error& e) {
    throw Error(Errc::InvalidPayload, e.what());
  }
  if (!report.valid()) {
    std::string why;
    for (const auto& p : report.problems()) why += (why.empty() ? "" : "; ") + p;
    throw Error(Errc::InvalidPayload, why);
  }
  const auto entry = report.entry_symbol_offsets.find(plan.payload_symbol);
  if (entry == report.entry_symbol_offsets.end()) {
    throw Error(Errc::InvalidPayload, "payload does not define " + plan.payload_symbol);
  }
  const auto segment = recompile::payload_segment(payload);

  std::map<std::string, elf::Address> plt_targets;
  for (const auto& [symbol, offset] : report.placeholder_offsets) {
    if (offset + 4 > segment.bytes.size() || load32(segment.bytes, offset) != codegen::placeholder_for(symbol)) {
      throw Error(Errc::PlaceholderUnresolved, "placeholder for " + symbol + " not found at its marker");
    }
    try {
      plt_targets[symbol] = elf::plt_entry_for(original, symbol);
    } catch (const Error& e) {
      throw Error(Errc::PlaceholderUnresolved, symbol + ": " + e.what());
    }
  }

  elf::ElfImage image = original;
  elf::AppendOptions options;
  options.align = elf::kPageSize;
  options.flags = segment.flags;
  options.mem_size = segment.mem_size;
  const auto appended = elf::append_segment(image, segment.bytes, options);

  RewriteResult result;
  result.payload_base = appended.load_address;
  result.relocated_phdrs = appended.relocated_phdrs;
  const std::uint32_t delta = appended.load_address - segment.vaddr;
  for (auto offset : report.relative_relocations) {
    const elf::Address at = appended.load_address + offset;
    const auto word = load32(segment.bytes, offset) + delta;
    elf::write_virtual(image, at, le32(word));
  }
  for (const auto& [symbol, offset] : report.placeholder_offsets) {
    elf::write_virtual(image, appended.load_address + offset, le32(plt_targets.at(symbol)));
  }

  result.detour_target = appended.load_address + entry->second;
  result.trampoline = detour::encode_trampoline(resolved, result.detour_target);
  elf::patch_text(image, resolved.function.address, result.trampoline);
  result.bytes = elf::serialize_elf(image);
  return result;
}

}  // namespace prd::rewrite
