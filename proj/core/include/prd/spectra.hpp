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

// Function-granularity coverage spectra: per-test traces joined into a
// coverage matrix, plus the four spectrum tallies every SBFL metric consumes.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace prd::spectra {

struct FunctionRecord {
  std::string name;
  std::uint64_t size_bytes = 0;
  bool is_library = false;
  // Defined in the binary's own symbol table (as opposed to imported).
  bool is_local = true;

  bool operator==(const FunctionRecord&) const = default;
};

enum class TestKind { Positive, Negative };
enum class Verdict { Pass, Fail };

std::string_view to_string(TestKind kind) noexcept;
std::string_view to_string(Verdict verdict) noexcept;

struct TestRecord {
  std::string id;
  TestKind kind = TestKind::Positive;
  Verdict verdict = Verdict::Pass;
  std::set<std::string> covered;

  bool operator==(const TestRecord&) const = default;
};

// Immutable once built; construct through build_matrix or from_json.
class CoverageMatrix {
 public:
  CoverageMatrix() = default;

  const std::vector<FunctionRecord>& functions() const noexcept { return functions_; }
  const std::vector<TestRecord>& tests() const noexcept { return tests_; }

  const FunctionRecord* find_function(std::string_view name) const noexcept;
  std::size_t failing_count() const noexcept;
  std::size_t passing_count() const noexcept;

 private:
  friend CoverageMatrix make_matrix(std::vector<FunctionRecord>, std::vector<TestRecord>);

  std::vector<FunctionRecord> functions_;
  std::vector<TestRecord> tests_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Validates uniqueness of names/ids and covered ⊆ declared; throws prd::Error.
CoverageMatrix make_matrix(std::vector<FunctionRecord> functions, std::vector<TestRecord> tests);

struct SpectrumCounts {
  std::uint64_t ef = 0;  // failing tests that cover the function
  std::uint64_t ep = 0;  // passing tests that cover it
  std::uint64_t nf = 0;  // failing tests that do not
  std::uint64_t np = 0;  // passing tests that do not

  bool operator==(const SpectrumCounts&) const = default;
};

// function name -> covered flag, for every function named in the profile.
using CoverageMap = std::map<std::string, bool, std::less<>>;

/// Reads a callgrind profile. A function is covered when any cost line under
/// its `fn=` block carries a nonzero event count, or when a `cfn=` record
/// attributes a call to it.
CoverageMap parse_callgrind(std::string_view text);

enum class UnknownPolicy { DropWithWarning, Error };

struct TraceRun {
  TestRecord meta;  // `covered` is ignored; it is filled from `coverage`
  CoverageMap coverage;
};

struct BuildResult {
  CoverageMatrix matrix;
  std::vector<std::string> warnings;
};

BuildResult build_matrix(const std::vector<TraceRun>& runs,
                         const std::vector<FunctionRecord>& functions,
                         UnknownPolicy policy = UnknownPolicy::DropWithWarning);

SpectrumCounts counts_for(const CoverageMatrix& matrix, std::string_view function);

// Normalized spectra interchange document.
struct SpectraDocument {
  std::string binary;
  CoverageMatrix matrix;
};

std::string to_json(const SpectraDocument& doc);
SpectraDocument spectra_from_json(std::string_view text);

}  // namespace prd::spectra
