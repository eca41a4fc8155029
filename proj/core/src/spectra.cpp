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

#include "prd/spectra.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "prd/error.hpp"

namespace prd::spectra {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(TestKind kind) noexcept {
  return kind == TestKind::Positive ? "positive" : "negative";
}

std::string_view to_string(Verdict verdict) noexcept {
  return verdict == Verdict::Pass ? "pass" : "fail";
}

const FunctionRecord* CoverageMatrix::find_function(std::string_view name) const noexcept {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &functions_[it->second];
}

std::size_t CoverageMatrix::failing_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      tests_.begin(), tests_.end(), [](const TestRecord& t) { return t.verdict == Verdict::Fail; }));
}

std::size_t CoverageMatrix::passing_count() const noexcept {
  return tests_.size() - failing_count();
}

CoverageMatrix make_matrix(std::vector<FunctionRecord> functions, std::vector<TestRecord> tests) {
  CoverageMatrix m;
  for (std::size_t i = 0; i < functions.size(); ++i) {
    if (functions[i].name.empty()) {
      throw Error(Errc::MalformedSpectra, "function with empty name");
    }
    if (!m.index_.emplace(functions[i].name, i).second) {
      throw Error(Errc::DuplicateFunction, functions[i].name);
    }
  }
  std::set<std::string, std::less<>> ids;
  for (const auto& t : tests) {
    if (!ids.insert(t.id).second) {
      throw Error(Errc::DuplicateTestId, t.id);
    }
    for (const auto& name : t.covered) {
      if (!m.index_.contains(name)) {
        throw Error(Errc::UnknownFunction, "test " + t.id + " covers undeclared " + name);
      }
    }
  }
  m.functions_ = std::move(functions);
  m.tests_ = std::move(tests);
  return m;
}

BuildResult build_matrix(const std::vector<TraceRun>& runs,
                         const std::vector<FunctionRecord>& functions, UnknownPolicy policy) {
  if (runs.empty()) {
    throw Error(Errc::NoTests, "no test runs supplied");
  }
  std::set<std::string, std::less<>> declared;
  for (const auto& f : functions) declared.insert(f.name);

  BuildResult result;
  std::vector<TestRecord> tests;
  tests.reserve(runs.size());
  std::set<std::string, std::less<>> ids;
  std::map<std::string, std::size_t> dropped;  // name -> number of traces
  for (const auto& run : runs) {
    if (!ids.insert(run.meta.id).second) {
      throw Error(Errc::DuplicateTestId, run.meta.id);
    }
    TestRecord rec = run.meta;
    rec.covered.clear();
    for (const auto& [name, covered] : run.coverage) {
      if (!declared.contains(name)) {
        if (policy == UnknownPolicy::Error) {
          throw Error(Errc::UnknownFunction, "trace for " + rec.id + " names undeclared " + name);
        }
        ++dropped[name];
        continue;
      }
      if (covered) rec.covered.insert(name);
    }
    tests.push_back(std::move(rec));
  }
  for (const auto& [name, count] : dropped) {
    result.warnings.push_back("dropping undeclared function " + name + " (" + std::to_string(count) + " traces)");
  }
  result.matrix = make_matrix(functions, std::move(tests));
  return result;
}

SpectrumCounts counts_for(const CoverageMatrix& matrix, std::string_view function) {
  if (matrix.find_function(function) == nullptr) {
    throw Error(Errc::UnknownFunction, std::string(function));
  }
  const std::string key(function);
  SpectrumCounts c;
  for (const auto& t : matrix.tests()) {
    const bool hit = t.covered.contains(key);
    if (t.verdict == Verdict::Fail) {
      (hit ? c.ef : c.nf)++;
    } else {
      (hit ? c.ep : c.np)++;
    }
  }
  return c;
}

std::string to_json(const SpectraDocument& doc) {
  ordered_json j;
  j["binary"] = doc.binary;
  ordered_json fns = ordered_json::array();
  for (const auto& f : doc.matrix.functions()) {
    ordered_json e;
    e["name"] = f.name;
    e["size"] = f.size_bytes;
    e["library"] = f.is_library;
    e["local"] = f.is_local;
    fns.push_back(std::move(e));
  }
  j["functions"] = std::move(fns);
  ordered_json tests = ordered_json::array();
  for (const auto& t : doc.matrix.tests()) {
    ordered_json e;
    e["id"] = t.id;
    e["kind"] = std::string(to_string(t.kind));
    e["verdict"] = std::string(to_string(t.verdict));
    e["covered"] = t.covered;
    tests.push_back(std::move(e));
  }
  j["tests"] = std::move(tests);
  return j.dump(2) + "\n";
}

namespace {

template <typename T>
T field(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::MalformedSpectra, std::string("missing key '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedSpectra, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

SpectraDocument spectra_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedSpectra, e.what());
  }
  SpectraDocument doc;
  doc.binary = field<std::string>(j, "binary");

  std::vector<FunctionRecord> functions;
  for (const auto& f : field<nlohmann::json>(j, "functions")) {
    FunctionRecord rec;
    rec.name = field<std::string>(f, "name");
    const auto size = field<std::int64_t>(f, "size");
    if (size < 0) throw Error(Errc::MalformedSpectra, "negative size for " + rec.name);
    rec.size_bytes = static_cast<std::uint64_t>(size);
    rec.is_library = field<bool>(f, "library");
    rec.is_local = field<bool>(f, "local");
    functions.push_back(std::move(rec));
  }

  std::vector<TestRecord> tests;
  for (const auto& t : field<nlohmann::json>(j, "tests")) {
    TestRecord rec;
    rec.id = field<std::string>(t, "id");
    const auto kind = field<std::string>(t, "kind");
    const auto verdict = field<std::string>(t, "verdict");
    if (kind != "positive" && kind != "negative") {
      throw Error(Errc::MalformedSpectra, "kind must be positive|negative, got " + kind);
    }
    if (verdict != "pass" && verdict != "fail") {
      throw Error(Errc::MalformedSpectra, "verdict must be pass|fail, got " + verdict);
    }
    rec.kind = kind == "positive" ? TestKind::Positive : TestKind::Negative;
    rec.verdict = verdict == "pass" ? Verdict::Pass : Verdict::Fail;
    for (const auto& name : field<std::vector<std::string>>(t, "covered")) rec.covered.insert(name);
    tests.push_back(std::move(rec));
  }
  doc.matrix = make_matrix(std::move(functions), std::move(tests));
  return doc;
}

}  // namespace prd::spectra
