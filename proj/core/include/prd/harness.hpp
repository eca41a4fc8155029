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

// Differential test execution: the same suite against the original and the
// patched binary, and the verdict comparison that decides whether the patch
// preserved behavior and removed the vulnerability.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prd/spectra.hpp"

namespace prd::harness {

using spectra::TestKind;

// Replaced by the binary path in a test's command.
inline constexpr std::string_view kBinaryToken = "{binary}";
inline constexpr double kDefaultTimeoutSeconds = 10.0;

struct Expectation {
  std::optional<int> exit_code;
  std::optional<std::string> stdout_digest;  // "sha256:<hex>"
  std::optional<int> crash_signal;           // the signal the exploit raises
};

struct TestSpec {
  std::string id;
  TestKind kind = TestKind::Positive;
  std::vector<std::string> command;  // first token is usually {binary}
  std::optional<std::string> stdin_path;
  Expectation expect;
  double timeout_s = kDefaultTimeoutSeconds;
  // Outcome on the original binary when already known (used for spectra).
  std::optional<spectra::Verdict> recorded_verdict;
};

struct Suite {
  std::vector<TestSpec> tests;
};

// Relative stdin paths are resolved against `base_dir`.
Suite suite_from_json(std::string_view text, const std::string& base_dir = ".");

enum class Comparator { ExitCode, ExitCodeDigest, CrashSignal };

std::string_view to_string(Comparator c) noexcept;
Comparator comparator_from_string(std::string_view text);

enum class FailReason { None, Crash, Timeout, ExitCode, Digest };

std::string_view to_string(FailReason r) noexcept;

struct Verdict {
  bool pass = false;
  FailReason reason = FailReason::None;
  int exit_code = 0;
  int signal = 0;
  std::string stdout_digest;

  static Verdict passed() { return {true, FailReason::None, 0, 0, {}}; }
  static Verdict failed(FailReason r) { return {false, r, 0, 0, {}}; }
};

std::string sha256_digest(std::string_view data);

/// Runs one test. Death by any signal is fail(crash); a test whose only
/// expectation is a crash signal passes when the process exits normally.
/// Throws SpawnFailure when the binary cannot be started.
Verdict run_test(const std::string& binary, const TestSpec& test, Comparator comparator = Comparator::ExitCodeDigest);

struct Outcome {
  std::string id;
  TestKind kind = TestKind::Positive;
  Verdict verdict;
};

std::vector<Outcome> run_suite(const std::string& binary, const Suite& suite,
                               Comparator comparator = Comparator::ExitCodeDigest);

enum class Classification { TestEquivalent, Mitigated, Regressed, BehaviorChanged };

std::string_view to_string(Classification c) noexcept;

struct PairedVerdict {
  std::string id;
  TestKind kind = TestKind::Positive;
  Verdict original;
  Verdict patched;
};

struct EquivalenceReport {
  std::vector<PairedVerdict> pairs;  // by test id
  Classification classification = Classification::TestEquivalent;
};

// Throws SuiteMismatch unless both sides cover the same ids with the same kinds.
EquivalenceReport compare(const std::vector<Outcome>& original, const std::vector<Outcome>& patched);

std::string to_json(const EquivalenceReport& report);

}  // namespace prd::harness
