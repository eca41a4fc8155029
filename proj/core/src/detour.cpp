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

#include "prd/detour.hpp"

#include <cstdio>
#include <deque>
#include <nlohmann/json.hpp>

#include "prd/error.hpp"
#include "prd/x86.hpp"

namespace prd::detour {

std::string_view to_string(ReferenceKind kind) noexcept {
  switch (kind) {
    case ReferenceKind::LocalFunction: return "local_function";
    case ReferenceKind::LocalData: return "local_data";
    case ReferenceKind::PltStub: return "plt_stub";
  }
  return "?";
}

ReferenceKind reference_kind_from_string(std::string_view text) {
  if (text == "local_function") return ReferenceKind::LocalFunction;
  if (text == "local_data") return ReferenceKind::LocalData;
  if (text == "plt_stub") return ReferenceKind::PltStub;
  throw Error(Errc::MalformedPlan, "unknown reference kind '" + std::string(text) + "'");
}

namespace {

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

// Defined function symbol starting at `address`, preferring global names.
const elf::SymbolEntry* function_at(const elf::ElfImage& image, elf::Address address) {
  const elf::SymbolEntry* best = nullptr;
  for (const auto& s : image.symbols()) {
    if (!s.defined || !s.is_function() || s.address != address || s.name.empty()) continue;
    if (best == nullptr || (best->binding == elf::Binding::Local && s.binding != elf::Binding::Local)) best = &s;
  }
  return best;
}

}  // namespace

CallScan scan_direct_calls(const elf::ElfImage& image, const elf::SymbolEntry& function) {
  const auto* seg = image.segment_at(function.address);
  if (seg == nullptr || (seg->flags & elf::kPfX) == 0) {
    throw Error(Errc::NotExecutableRange, function.name + " is not in an executable segment");
  }
  const auto body = elf::read_virtual(image, function.address, function.size_bytes);

  std::map<elf::Address, std::string> plt_by_address;
  for (const auto& [name, addr] : image.plt_map()) plt_by_address.emplace(addr, name);

  CallScan scan;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto insn = x86::decode(std::span(body).subspan(pos));
    if (!insn || pos + insn->length > body.size()) {
      throw Error(Errc::UndecodableBody, function.name + " at offset " + std::to_string(pos));
    }
    if (insn->flow == x86::Flow::CallIndirect) {
      ++scan.indirect_count;
    } else if (insn->flow == x86::Flow::CallRel && !insn->operand_size_override) {
      const elf::Address next = function.address + static_cast<elf::Address>(pos + insn->length);
      const elf::Address target = next + static_cast<elf::Address>(insn->displacement);
      if (auto plt = plt_by_address.find(target); plt != plt_by_address.end()) {
        scan.callees.try_emplace(plt->second, ReferenceSpec{plt->second, ReferenceKind::PltStub, target});
      } else if (const auto* callee = function_at(image, target)) {
        if (callee->name != function.name) {
          scan.callees.try_emplace(callee->name, ReferenceSpec{callee->name, ReferenceKind::LocalFunction, target});
        }
      } else if (target - function.address >= function.size_bytes) {
        scan.unresolved_targets.push_back(target);
      }
    }
    pos += insn->length;
  }
  return scan;
}

std::vector<std::string> required_references(const CallGraph& graph, const std::set<std::string>& entries) {
  std::vector<std::string> out;
  std::set<std::string> seen(entries.begin(), entries.end());
  std::deque<std::string> queue(entries.begin(), entries.end());
  while (!queue.empty()) {
    const auto node = std::move(queue.front());
    queue.pop_front();
    const auto it = graph.find(node);
    if (it == graph.end()) continue;
    for (const auto& callee : it->second) {
      if (!seen.insert(callee).second) continue;
      out.push_back(callee);
      queue.push_back(callee);
    }
  }
  return out;
}

std::uint64_t paper_byte_cost(std::uint64_t r) noexcept { return 7 * r + 4; }

std::uint64_t encoded_length(std::uint64_t r, bool ebx_required) noexcept {
  return 1 + 5 * r + (ebx_required ? 1 : 0) + 1 + 5;
}

StackCorrection stack_correction(std::size_t reference_count, bool ebx_required) noexcept {
  StackCorrection c;
  c.added_words = reference_count + (ebx_required ? 1 : 0);
  c.byte_shift = 4 * c.added_words;
  return c;
}

std::vector<std::uint8_t> encode_trampoline(const DetourPlan& plan, elf::Address detour_target) {
  const auto length = encoded_length(plan.references.size(), plan.ebx_required);
  if (length > plan.budget_bytes) {
    throw Error(Errc::BudgetExceeded, plan.function.name + " needs " + std::to_string(length) +
                                          " bytes, body has " + std::to_string(plan.budget_bytes));
  }
  const std::int64_t rel = std::int64_t{detour_target} - (std::int64_t{plan.function.address} + std::int64_t(length));
  if (rel < INT32_MIN || rel > INT32_MAX) {
    throw Error(Errc::TargetOutOfRel32Range, hex(detour_target) + " from " + hex(plan.function.address));
  }

  std::vector<std::uint8_t> out;
  out.reserve(length);
  auto put32 = [&out](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  out.push_back(0x58);
  for (auto it = plan.references.rbegin(); it != plan.references.rend(); ++it) {
    out.push_back(0x68);
    put32(it->address);
  }
  if (plan.ebx_required) out.push_back(0x53);
  out.push_back(0x50);
  out.push_back(0xe9);
  put32(static_cast<std::uint32_t>(static_cast<std::int32_t>(rel)));
  return out;
}

ReferenceSpec resolve_reference(const elf::ElfImage& image, std::string_view name) {
  for (const auto& s : image.symbols()) {
    if (s.name != name || !s.defined) continue;
    if (s.address == 0) break;
    const auto kind = s.type == elf::kSttObject ? ReferenceKind::LocalData : ReferenceKind::LocalFunction;
    return {std::string(name), kind, s.address};
  }
  if (image.plt_map().contains(name)) {
    return {std::string(name), ReferenceKind::PltStub, elf::plt_entry_for(image, name)};
  }
  throw Error(Errc::SymbolNotFound, "reference " + std::string(name));
}

DetourPlan plan_detour(const elf::ElfImage& image, std::string_view function_name, std::string_view payload_symbol,
                       const PlanOptions& options) {
  if (image.is_pie()) throw Error(Errc::UnsupportedPie, "detouring requires a non-PIE executable");
  if (payload_symbol.empty()) throw Error(Errc::InvalidArgument, "payload symbol is empty");

  DetourPlan plan;
  plan.function = elf::find_symbol(image, function_name);
  if (!plan.function.defined) throw Error(Errc::SymbolNotFound, std::string(function_name) + " is undefined");
  plan.ebx_required = options.ebx_required;
  plan.budget_bytes = plan.function.size_bytes;
  plan.payload_symbol = std::string(payload_symbol);

  if (options.references) {
    for (const auto& name : *options.references) plan.references.push_back(resolve_reference(image, name));
  } else {
    const auto scan = scan_direct_calls(image, plan.function);
    CallGraph graph;
    auto& edges = graph[plan.function.name];
    for (const auto& [name, spec] : scan.callees) edges.insert(name);
    for (const auto& name : required_references(graph, {plan.function.name})) {
      plan.references.push_back(scan.callees.find(name)->second);
    }
  }

  const auto r = plan.references.size();
  plan.paper_cost = paper_byte_cost(r);
  plan.encoded_cost = encoded_length(r, plan.ebx_required);
  if (!plan.fits()) {
    throw Error(Errc::PlanDoesNotFit, plan.function.name + ": " + std::to_string(r) + " references need " +
                                          std::to_string(plan.encoded_cost) + " bytes, body has " +
                                          std::to_string(plan.budget_bytes));
  }
  return plan;
}

std::string to_json(const DetourPlan& plan) {
  nlohmann::ordered_json j;
  j["function"] = plan.function.name;
  auto& refs = j["refs"] = nlohmann::ordered_json::array();
  for (const auto& r : plan.references) {
    refs.push_back({{"name", r.name}, {"kind", to_string(r.kind)}, {"addr", hex(r.address)}});
  }
  j["ebx"] = plan.ebx_required;
  j["budget"] = plan.budget_bytes;
  j["paper_cost"] = plan.paper_cost;
  j["encoded_cost"] = plan.encoded_cost;
  j["payload_symbol"] = plan.payload_symbol;
  return j.dump(2) + "\n";
}

DetourPlan plan_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DetourPlan plan;
    plan.function.name = j.at("function").get<std::string>();
    for (const auto& item : j.at("refs")) {
      ReferenceSpec r;
      r.name = item.at("name").get<std::string>();
      r.kind = reference_kind_from_string(item.at("kind").get<std::string>());
      r.address = static_cast<elf::Address>(std::stoul(item.at("addr").get<std::string>(), nullptr, 16));
      if (r.address == 0) throw Error(Errc::MalformedPlan, "reference " + r.name + " has address 0");
      plan.references.push_back(std::move(r));
    }
    plan.ebx_required = j.at("ebx").get<bool>();
    plan.budget_bytes = j.at("budget").get<std::uint32_t>();
    plan.paper_cost = j.at("paper_cost").get<std::uint64_t>();
    plan.encoded_cost = j.at("encoded_cost").get<std::uint64_t>();
    plan.payload_symbol = j.at("payload_symbol").get<std::string>();
    plan.function.size_bytes = plan.budget_bytes;
    if (plan.encoded_cost != encoded_length(plan.references.size(), plan.ebx_required)) {
      throw Error(Errc::MalformedPlan, "encoded_cost disagrees with the reference count");
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedPlan, e.what());
  } catch (const std::logic_error& e) {  // stoul
    throw Error(Errc::MalformedPlan, e.what());
  }
}

}  // namespace prd::detour
