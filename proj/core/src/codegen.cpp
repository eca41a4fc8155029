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

#include "prd/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <functional>
#include <nlohmann/json.hpp>
#include <queue>

#include "prd/error.hpp"

namespace prd::codegen {
namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_identifier(std::string_view s) {
  return !s.empty() && ident_start(s[0]) && std::all_of(s.begin(), s.end(), ident_char);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

void require_identifier(std::string_view s, std::string_view what) {
  if (!is_identifier(s)) {
    throw Error(Errc::InvalidArgument, std::string(what) + " '" + std::string(s) + "' is not a C identifier");
  }
}

// Name declared by one parameter: the identifier after "(*" for function
// pointers, otherwise the last identifier before any array suffix.
std::optional<std::string> parameter_name(std::string_view p) {
  if (const auto fp = p.find("(*"); fp != std::string_view::npos) {
    auto i = fp + 2;
    while (i < p.size() && std::isspace(static_cast<unsigned char>(p[i]))) ++i;
    const auto b = i;
    while (i < p.size() && ident_char(p[i])) ++i;
    if (i == b) return std::nullopt;
    return std::string(p.substr(b, i - b));
  }
  auto end = p.find('[');
  if (end == std::string_view::npos) end = p.size();
  auto e = end;
  while (e > 0 && std::isspace(static_cast<unsigned char>(p[e - 1]))) --e;
  auto b = e;
  while (b > 0 && ident_char(p[b - 1])) --b;
  if (b == e || !ident_start(p[b])) return std::nullopt;
  // A lone type ("int", "unsigned int", "struct s *") has no name left over.
  const auto before = trim(p.substr(0, b));
  if (before.empty() || before == "struct" || before == "union" || before == "enum") return std::nullopt;
  static const std::set<std::string, std::less<>> kTypeWords = {
      "int", "char", "short", "long", "unsigned", "signed", "float", "double", "void", "_Bool", "const", "volatile"};
  if (kTypeWords.contains(p.substr(b, e - b))) return std::nullopt;
  return std::string(p.substr(b, e - b));
}

std::vector<std::string> split_top_level(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(' || s[i] == '[') ++depth;
    if (s[i] == ')' || s[i] == ']') --depth;
    if (s[i] == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(s.substr(start)));
  return out;
}

// Declarator for `name` with pointer-to-function type text "R (*)(A)".
std::string declare(std::string_view type, std::string_view name) {
  if (const auto fp = type.find("(*)"); fp != std::string_view::npos) {
    return std::string(type.substr(0, fp + 2)) + std::string(name) + std::string(type.substr(fp + 2));
  }
  std::string out(type);
  if (!out.empty() && out.back() != '*') out.push_back(' ');
  return out + std::string(name);
}

std::string function_pointer_type(const InterfaceReference& r) {
  return r.c_type.empty() ? "void *(*)()" : r.c_type;
}

std::string data_type(const InterfaceReference& r) { return r.c_type.empty() ? "int" : r.c_type; }

std::string data_slot(std::string_view name) { return "prd_ref_" + std::string(name); }

std::string fixup_label_for(const InterfaceSpec& spec) { return "prd_fix_det_" + spec.function; }

// One C string literal line per assembly line.
std::string asm_lines(const std::vector<std::string>& lines, std::string_view indent) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out += std::string(indent) + "\"" + lines[i] + "\"";
    if (i + 1 < lines.size()) out += "\n";
  }
  return out;
}

bool is_void(std::string_view type) { return collapse_spaces(type) == "void"; }

}  // namespace

Prototype parse_prototype(std::string_view text) {
  const auto t = collapse_spaces(trim(text));
  if (t.empty()) throw Error(Errc::EmptyPrototype, "prototype text is empty");
  const auto open = t.find('(');
  const auto close = t.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw Error(Errc::InvalidPrototype, "missing parameter list in '" + t + "'");
  }
  if (trim(std::string_view(t).substr(close + 1)).find_first_not_of(';') != std::string::npos) {
    throw Error(Errc::InvalidPrototype, "trailing text after parameter list in '" + t + "'");
  }
  auto head = trim(std::string_view(t).substr(0, open));
  auto b = head.size();
  while (b > 0 && ident_char(head[b - 1])) --b;
  Prototype p;
  p.name = head.substr(b);
  p.return_type = trim(std::string_view(head).substr(0, b));
  if (p.name.empty() || !ident_start(p.name[0])) throw Error(Errc::InvalidPrototype, "no function name in '" + t + "'");
  if (p.return_type.empty()) throw Error(Errc::EmptyPrototype, "no return type in '" + t + "'");

  const auto params = trim(std::string_view(t).substr(open + 1, close - open - 1));
  if (params.empty() || params == "void") return p;
  for (const auto& item : split_top_level(params)) {
    if (item == "...") throw Error(Errc::InvalidPrototype, "variadic functions cannot be forwarded");
    auto name = parameter_name(item);
    if (!name) throw Error(Errc::InvalidPrototype, "unnamed parameter '" + item + "'");
    p.parameters.push_back({item, *name});
  }
  return p;
}

std::optional<std::string> find_prototype(std::string_view source, std::string_view function) {
  std::size_t from = 0;
  while (true) {
    const auto at = source.find(function, from);
    if (at == std::string_view::npos) return std::nullopt;
    from = at + 1;
    if (at > 0 && ident_char(source[at - 1])) continue;
    auto i = at + function.size();
    while (i < source.size() && std::isspace(static_cast<unsigned char>(source[i]))) ++i;
    if (i >= source.size() || source[i] != '(') continue;
    int depth = 0;
    auto j = i;
    for (; j < source.size(); ++j) {
      if (source[j] == '(') ++depth;
      if (source[j] == ')' && --depth == 0) break;
    }
    if (j >= source.size()) return std::nullopt;
    auto k = j + 1;
    while (k < source.size() && std::isspace(static_cast<unsigned char>(source[k]))) ++k;
    if (k >= source.size() || source[k] != '{') continue;  // a call or a declaration
    const auto line_start = source.rfind('\n', at);
    const auto begin = line_start == std::string_view::npos ? 0 : line_start + 1;
    auto proto = collapse_spaces(source.substr(begin, j + 1 - begin));
    if (proto.starts_with("static ")) proto.erase(0, 7);
    return proto;
  }
}

InterfaceSpec interface_for(const detour::DetourPlan& plan, const Prototype& prototype) {
  InterfaceSpec spec;
  spec.function = prototype.name;
  spec.return_type = prototype.return_type;
  spec.parameters = prototype.parameters;
  for (const auto& r : plan.references) spec.references.push_back({r.name, r.kind, {}});
  spec.ebx_required = plan.ebx_required;
  spec.stack_correction = plan.correction();
  return spec;
}

std::string emit_reference_declarations(const InterfaceSpec& spec) {
  std::string out;
  if (spec.ebx_required) {
    out += "void *" + std::string(kSavedEbxSymbol) + " __attribute__((weak, visibility(\"hidden\")));\n";
  }
  for (const auto& r : spec.references) {
    require_identifier(r.name, "reference");
    if (r.kind == detour::ReferenceKind::LocalData) {
      out += "static " + declare(data_type(r) + " *", data_slot(r.name)) + ";\n";
      out += "#define " + r.name + " (*" + data_slot(r.name) + ")\n";
    } else {
      out += "static " + declare(function_pointer_type(r), r.name) + ";\n";
    }
  }
  return out;
}

std::string emit_fixup_stub(const detour::StackCorrection& correction, std::string_view fixup_label) {
  if (correction.byte_shift % 4 != 0) {
    throw Error(Errc::MisalignedShift, std::to_string(correction.byte_shift) + " bytes");
  }
  if (correction.byte_shift == 0) return {};
  const std::string label(fixup_label);
  return "__asm__(\n" +
         asm_lines({".pushsection .text\\n", label + ":\\n",
                    "\\taddl $" + std::to_string(correction.byte_shift - 4) + ", %esp\\n", "\\tret\\n",
                    ".popsection\\n"},
                   "    ") +
         ");\n";
}

std::string emit_stack_epilogue(const detour::StackCorrection& correction, std::string_view fixup_label) {
  if (correction.byte_shift % 4 != 0) {
    throw Error(Errc::MisalignedShift, std::to_string(correction.byte_shift) + " bytes");
  }
  if (correction.byte_shift == 0) return {};
  const auto shift = std::to_string(correction.byte_shift);
  const auto slot = std::to_string(correction.byte_shift + 4);
  const std::string label(fixup_label);
  return "  /* stack correction: " + shift + " bytes */\n"
         "  __asm__ __volatile__(\n" +
         asm_lines({"movl 4(%%ebp), %%edx\\n\\t", "movl %%edx, " + slot + "(%%ebp)\\n\\t", "call 1f\\n",
                    "1:\\tpopl %%edx\\n\\t", "leal " + label + "-1b(%%edx), %%edx\\n\\t", "movl %%edx, 4(%%ebp)"},
                   "      ") +
         "\n      ::: \"edx\", \"memory\");\n";
}

std::string emit_detour_interface(const InterfaceSpec& spec) {
  if (trim(spec.return_type).empty() || trim(spec.function).empty()) {
    throw Error(Errc::EmptyPrototype, "interface for '" + spec.function + "' has no return type or name");
  }
  require_identifier(spec.function, "function");
  const auto label = fixup_label_for(spec);
  const bool returns = !is_void(spec.return_type);

  std::vector<std::string> params;
  if (spec.ebx_required) params.push_back("void *prd_ebx");
  for (const auto& r : spec.references) {
    require_identifier(r.name, "reference");
    params.push_back("void *my" + r.name);
  }
  std::vector<std::string> args;
  for (const auto& p : spec.parameters) {
    params.push_back(p.text);
    args.push_back(p.name);
  }

  std::string out = emit_fixup_stub(spec.stack_correction, label);
  if (!out.empty()) out += "\n";
  out += spec.return_type + " det_" + spec.function + "(";
  for (std::size_t i = 0; i < params.size(); ++i) out += (i ? ", " : "") + params[i];
  if (params.empty()) out += "void";
  out += ")\n{\n";
  if (returns) out += "  " + declare(spec.return_type, "prd_ret") + ";\n\n";
  if (spec.ebx_required) out += "  " + std::string(kSavedEbxSymbol) + " = prd_ebx;\n";
  for (const auto& r : spec.references) {
    if (r.kind == detour::ReferenceKind::LocalData) {
      out += "  " + data_slot(r.name) + " = (" + data_type(r) + " *)my" + r.name + ";\n";
    } else {
      out += "  " + r.name + " = (" + function_pointer_type(r) + ")my" + r.name + ";\n";
    }
  }
  std::string call = spec.function + "(";
  for (std::size_t i = 0; i < args.size(); ++i) call += (i ? ", " : "") + args[i];
  call += ");\n";
  out += returns ? "  prd_ret = " + call : "  " + call;
  out += emit_stack_epilogue(spec.stack_correction, label);
  if (returns) out += "  return prd_ret;\n";
  out += "}\n";
  return out;
}

std::uint32_t placeholder_for(std::string_view symbol) noexcept {
  // FNV-1a, kept away from 0 and from small integers.
  std::uint32_t h = 2166136261u;
  for (unsigned char c : symbol) {
    h ^= c;
    h *= 16777619u;
  }
  return h | 0x80000000u;
}

std::string placeholder_marker(std::string_view symbol) {
  return std::string(kPlaceholderMarkerPrefix) + std::string(symbol);
}

std::string emit_unbound_symbol_interface(std::string_view symbol, bool restore_ebx) {
  if (symbol.empty()) throw Error(Errc::InvalidArgument, "unbound symbol name is empty");
  require_identifier(symbol, "symbol");
  const std::string s(symbol);
  const auto marker = placeholder_marker(symbol);
  char imm[16];
  std::snprintf(imm, sizeof imm, "0x%08x", placeholder_for(symbol));

  std::vector<std::string> lines = {".pushsection .text\\n", ".globl " + s + "\\n", ".hidden " + s + "\\n",
                                    ".type " + s + ", @function\\n", s + ":\\n"};
  if (restore_ebx) {
    lines.insert(lines.end(), {"\\tcall 1f\\n", "1:\\tpopl %eax\\n",
                               "\\tmovl " + std::string(kSavedEbxSymbol) + "-1b(%eax), %ebx\\n"});
  }
  lines.insert(lines.end(), {"\\t.byte 0xb8\\n", ".globl " + marker + "\\n", ".hidden " + marker + "\\n",
                             marker + ":\\n", "\\t.long " + std::string(imm) + "\\n", "\\tjmp *%eax\\n",
                             ".size " + s + ", .-" + s + "\\n", ".popsection\\n"});
  return "/* unbound symbol: " + s + " */\n__asm__(\n" + asm_lines(lines, "    ") + ");\n";
}

const Substitutions& default_substitutions() {
  static const Substitutions table = {
      {"_DWORD", "unsigned int"},
      {"_BYTE", "unsigned char"},
      {"_WORD", "unsigned short"},
      {"__fastcall", ""},
  };
  return table;
}

Substitutions substitutions_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(Errc::InvalidArgument, "substitution table must be a JSON object");
    Substitutions out;
    for (const auto& [from, to] : j.items()) {
      require_identifier(from, "substitution key");
      out[from] = to.get<std::string>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("bad substitution table: ") + e.what());
  }
}

std::string normalize_decompiled_source(std::string_view text, const Substitutions& table) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n) {
    const char c = text[i];
    if (c == '/' && i + 1 < n && (text[i + 1] == '/' || text[i + 1] == '*')) {
      const bool line = text[i + 1] == '/';
      const auto end = line ? text.find('\n', i) : text.find("*/", i + 2);
      const auto stop = end == std::string_view::npos ? n : (line ? end : end + 2);
      out.append(text.substr(i, stop - i));
      i = stop;
    } else if (c == '"' || c == '\'') {
      auto j = i + 1;
      while (j < n && text[j] != c && text[j] != '\n') j += text[j] == '\\' ? 2 : 1;
      j = std::min(n, j + 1);
      out.append(text.substr(i, j - i));
      i = j;
    } else if (ident_start(c)) {
      auto j = i;
      while (j < n && ident_char(text[j])) ++j;
      const auto token = text.substr(i, j - i);
      const auto it = table.find(token);
      out.append(it == table.end() ? token : std::string_view(it->second));
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      // Numbers with suffixes (0x10u, 1e5) are one token.
      auto j = i;
      while (j < n && ident_char(text[j])) ++j;
      out.append(text.substr(i, j - i));
      i = j;
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

std::vector<OrderedDefinition> order_type_definitions(const std::vector<TypeDefinition>& defs,
                                                      const std::set<std::string>& external) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!index.emplace(defs[i].name, i).second) {
      throw Error(Errc::InvalidArgument, "type '" + defs[i].name + "' defined twice");
    }
  }
  std::vector<std::vector<std::size_t>> edges(defs.size());
  for (std::size_t i = 0; i < defs.size(); ++i) {
    for (const auto& dep : defs[i].dependencies) {
      if (auto it = index.find(dep); it != index.end()) {
        edges[i].push_back(it->second);
      } else if (!external.contains(dep)) {
        throw Error(Errc::UnresolvedDependency, defs[i].name + " needs " + dep);
      }
    }
  }

  // Tarjan's strongly connected components.
  const std::size_t n = defs.size();
  std::vector<int> order(n, -1), low(n, 0), component(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0, components = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    order[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : edges[v]) {
      if (order[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], order[w]);
      }
    }
    if (low[v] == order[v]) {
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component[w] = components;
      } while (w != v);
      ++components;
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (order[v] < 0) visit(v);
  }

  std::vector<std::vector<std::size_t>> members(components);
  for (std::size_t v = 0; v < n; ++v) members[component[v]].push_back(v);
  for (auto& m : members) {
    std::sort(m.begin(), m.end(), [&](auto a, auto b) { return defs[a].name < defs[b].name; });
  }

  // Kahn over the condensation; a component waits for the components it uses.
  std::vector<std::set<int>> uses(components);
  std::vector<std::set<int>> used_by(components);
  std::vector<bool> cyclic(components, false);
  for (std::size_t v = 0; v < n; ++v) {
    for (auto w : edges[v]) {
      if (component[v] == component[w]) {
        cyclic[component[v]] = true;
      } else {
        uses[component[v]].insert(component[w]);
        used_by[component[w]].insert(component[v]);
      }
    }
  }
  auto key = [&](int c) { return defs[members[c].front()].name; };
  auto later = [&](int a, int b) { return key(a) > key(b); };
  std::priority_queue<int, std::vector<int>, decltype(later)> ready(later);
  std::vector<std::size_t> pending(components);
  for (int c = 0; c < components; ++c) {
    pending[c] = uses[c].size();
    if (pending[c] == 0) ready.push(c);
  }

  std::vector<OrderedDefinition> out;
  while (!ready.empty()) {
    const int c = ready.top();
    ready.pop();
    if (cyclic[c]) {
      for (auto v : members[c]) {
        const auto& d = defs[v];
        out.push_back({OrderedDefinition::Kind::ForwardDeclaration, d.name,
                       d.forward_declaration.empty() ? d.name + ";" : d.forward_declaration});
      }
    }
    for (auto v : members[c]) out.push_back({OrderedDefinition::Kind::Body, defs[v].name, defs[v].body});
    for (int user : used_by[c]) {
      if (--pending[user] == 0) ready.push(user);
    }
  }
  return out;
}

std::vector<TypeDefinition> type_definitions_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<TypeDefinition> out;
    for (const auto& item : j) {
      TypeDefinition d;
      d.name = item.at("name").get<std::string>();
      d.body = item.at("body").get<std::string>();
      if (item.contains("deps")) d.dependencies = item.at("deps").get<std::set<std::string>>();
      if (item.contains("forward")) d.forward_declaration = item.at("forward").get<std::string>();
      out.push_back(std::move(d));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("bad type definitions: ") + e.what());
  }
}

std::string emit_payload_source(const PayloadSource& source) {
  std::string out = "/* payload for " + source.interface.function + " */\n\n";
  const auto ordered = order_type_definitions(source.types);
  for (const auto& d : ordered) out += d.text + "\n";
  if (!ordered.empty()) out += "\n";
  out += emit_reference_declarations(source.interface) + "\n";
  for (const auto& sym : source.imports) {
    out += emit_unbound_symbol_interface(sym, source.interface.ebx_required) + "\n";
  }
  if (!source.decompiled.empty()) {
    out += source.decompiled;
    if (source.decompiled.back() != '\n') out += "\n";
    out += "\n";
  }
  out += emit_detour_interface(source.interface);
  return out;
}

}  // namespace prd::codegen
