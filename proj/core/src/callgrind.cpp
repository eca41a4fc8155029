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

// Reader for the subset of the callgrind profile format needed to decide
// per-function coverage. Costs are not accumulated; only "nonzero or not".

#include <charconv>
#include <optional>
#include <unordered_map>

#include "prd/error.hpp"
#include "prd/spectra.hpp"

namespace prd::spectra {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<std::uint64_t> parse_uint(std::string_view tok) {
  int base = 10;
  if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) {
    tok.remove_prefix(2);
    base = 16;
  }
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, base);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) return std::nullopt;
  return v;
}

bool is_position_token(std::string_view tok) {
  if (tok == "*") return true;
  if (!tok.empty() && (tok[0] == '+' || tok[0] == '-')) tok.remove_prefix(1);
  return parse_uint(tok).has_value();
}

bool starts_cost_line(std::string_view line) {
  const char c = line.front();
  return (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '*';
}

// One compression namespace ("(N) name" defines, "(N)" reuses).
class NameTable {
 public:
  std::string resolve(std::string_view spec, std::size_t line_no) {
    spec = trim(spec);
    if (spec.empty() || spec.front() != '(') return std::string(spec);
    const auto close = spec.find(')');
    if (close == std::string_view::npos) {
      throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": unterminated name id");
    }
    const auto id = parse_uint(spec.substr(1, close - 1));
    if (!id) {
      throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": bad name id");
    }
    const auto rest = trim(spec.substr(close + 1));
    if (!rest.empty()) {
      names_[*id] = std::string(rest);
      return std::string(rest);
    }
    auto it = names_.find(*id);
    if (it == names_.end()) {
      throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": name id (" +
                                              std::to_string(*id) + ") used before definition");
    }
    return it->second;
  }

 private:
  std::unordered_map<std::uint64_t, std::string> names_;
};

}  // namespace

CoverageMap parse_callgrind(std::string_view text) {
  CoverageMap result;
  NameTable fn_names;
  NameTable file_names;
  NameTable obj_names;

  std::size_t positions = 1;
  bool saw_events = false;
  bool saw_fn = false;
  std::optional<std::string> current_fn;
  std::optional<std::string> pending_cfn;
  // Set by calls=, consumed by the next cost line.
  bool has_pending_calls = false;
  std::uint64_t pending_calls = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    if (starts_cost_line(line)) {
      if (!saw_events) throw Error(Errc::MalformedProfile, "cost line before events: header");
      if (!current_fn) {
        throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": cost line outside fn=");
      }
      const auto toks = split_ws(line);
      if (toks.size() < positions) {
        throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": missing positions");
      }
      bool nonzero = false;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i < positions) {
          if (!is_position_token(toks[i])) {
            throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": bad position");
          }
          continue;
        }
        const auto v = parse_uint(toks[i]);
        if (!v) throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": bad cost");
        nonzero = nonzero || *v != 0;
      }
      if (nonzero) result[*current_fn] = true;
      if (has_pending_calls) {
        result.try_emplace(*pending_cfn, false);
        if (pending_calls > 0 || nonzero) result[*pending_cfn] = true;
        has_pending_calls = false;
        pending_cfn.reset();
      }
      continue;
    }

    if (has_pending_calls) {
      throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": calls= not followed by a cost line");
    }

    const auto eq = line.find('=');
    const auto colon = line.find(':');
    if (colon != std::string_view::npos && (eq == std::string_view::npos || colon < eq)) {
      const auto key = trim(line.substr(0, colon));
      const auto value = trim(line.substr(colon + 1));
      if (key == "events") {
        if (split_ws(value).empty()) throw Error(Errc::MalformedProfile, "empty events: header");
        saw_events = true;
      } else if (key == "positions") {
        positions = split_ws(value).size();
        if (positions == 0) throw Error(Errc::MalformedProfile, "empty positions: header");
      }
      continue;
    }
    if (eq == std::string_view::npos) {
      throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": unrecognized record");
    }

    const auto key = line.substr(0, eq);
    const auto value = line.substr(eq + 1);
    if (key == "fn") {
      if (!saw_events) throw Error(Errc::MalformedProfile, "fn= record before events: header");
      current_fn = fn_names.resolve(value, line_no);
      result.try_emplace(*current_fn, false);
      saw_fn = true;
    } else if (key == "cfn") {
      pending_cfn = fn_names.resolve(value, line_no);
    } else if (key == "calls") {
      if (!pending_cfn) {
        throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": calls= without cfn=");
      }
      const auto toks = split_ws(value);
      const auto count = toks.empty() ? std::nullopt : parse_uint(toks[0]);
      if (!count) throw Error(Errc::MalformedProfile, "line " + std::to_string(line_no) + ": bad calls= count");
      pending_calls = *count;
      has_pending_calls = true;
    } else if (key == "fl" || key == "fi" || key == "fe" || key == "cfi" || key == "cfl") {
      file_names.resolve(value, line_no);
    } else if (key == "ob" || key == "cob") {
      obj_names.resolve(value, line_no);
    }
    // jump=, jcnd= and other records do not affect function coverage.
  }

  if (has_pending_calls) throw Error(Errc::MalformedProfile, "calls= at end of profile");
  if (!saw_events) throw Error(Errc::MalformedProfile, "missing events: header");
  if (!saw_fn) throw Error(Errc::EmptyProfile, "profile has no fn= records");
  return result;
}

}  // namespace prd::spectra
