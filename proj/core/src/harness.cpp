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

#include "prd/harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "prd/error.hpp"
#include "process.hpp"

namespace prd::harness {

std::string_view to_string(Comparator c) noexcept {
  switch (c) {
    case Comparator::ExitCode: return "exit_code";
    case Comparator::ExitCodeDigest: return "exit_code_digest";
    case Comparator::CrashSignal: return "crash_signal";
  }
  return "?";
}

Comparator comparator_from_string(std::string_view text) {
  for (auto c : {Comparator::ExitCode, Comparator::ExitCodeDigest, Comparator::CrashSignal}) {
    if (to_string(c) == text) return c;
  }
  throw Error(Errc::InvalidArgument, "unknown comparator '" + std::string(text) + "'");
}

std::string_view to_string(FailReason r) noexcept {
  switch (r) {
    case FailReason::None: return "none";
    case FailReason::Crash: return "crash";
    case FailReason::Timeout: return "timeout";
    case FailReason::ExitCode: return "exit_code";
    case FailReason::Digest: return "digest";
  }
  return "?";
}

std::string_view to_string(Classification c) noexcept {
  switch (c) {
    case Classification::TestEquivalent: return "test_equivalent";
    case Classification::Mitigated: return "mitigated";
    case Classification::Regressed: return "regressed";
    case Classification::BehaviorChanged: return "behavior_changed";
  }
  return "?";
}

Suite suite_from_json(std::string_view text, const std::string& base_dir) {
  try {
    const auto j = nlohmann::json::parse(text);
    Suite suite;
    std::set<std::string> ids;
    for (const auto& item : j.at("tests")) {
      TestSpec t;
      t.id = item.at("id").get<std::string>();
      if (!ids.insert(t.id).second) throw Error(Errc::MalformedSuite, "duplicate test id " + t.id);
      const auto kind = item.at("kind").get<std::string>();
      if (kind == "positive") t.kind = TestKind::Positive;
      else if (kind == "negative") t.kind = TestKind::Negative;
      else throw Error(Errc::MalformedSuite, t.id + ": kind '" + kind + "'");
      t.command = item.at("cmd").get<std::vector<std::string>>();
      if (t.command.empty()) throw Error(Errc::MalformedSuite, t.id + ": empty cmd");
      if (item.contains("stdin") && !item.at("stdin").is_null()) {
        std::filesystem::path p = item.at("stdin").get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        t.stdin_path = p.string();
      }
      if (item.contains("expect")) {
        const auto& e = item.at("expect");
        if (e.contains("exit_code")) t.expect.exit_code = e.at("exit_code").get<int>();
        if (e.contains("stdout_digest")) t.expect.stdout_digest = e.at("stdout_digest").get<std::string>();
        if (e.contains("crash_signal")) t.expect.crash_signal = e.at("crash_signal").get<int>();
      }
      if (item.contains("verdict")) {
        const auto v = item.at("verdict").get<std::string>();
        if (v == "pass") t.recorded_verdict = spectra::Verdict::Pass;
        else if (v == "fail") t.recorded_verdict = spectra::Verdict::Fail;
        else throw Error(Errc::MalformedSuite, t.id + ": verdict '" + v + "'");
      }
      if (item.contains("timeout_s")) t.timeout_s = item.at("timeout_s").get<double>();
      if (!(t.timeout_s > 0) || !std::isfinite(t.timeout_s)) {
        throw Error(Errc::MalformedSuite, t.id + ": timeout must be positive");
      }
      suite.tests.push_back(std::move(t));
    }
    return suite;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedSuite, e.what());
  }
}

std::string sha256_digest(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* kHex = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

Verdict run_test(const std::string& binary, const TestSpec& test, Comparator comparator) {
  std::vector<std::string> argv;
  for (const auto& tok : test.command) {
    std::string arg = tok;
    for (auto at = arg.find(kBinaryToken); at != std::string::npos; at = arg.find(kBinaryToken, at + binary.size())) {
      arg.replace(at, kBinaryToken.size(), binary);
    }
    argv.push_back(std::move(arg));
  }
  detail::ProcessOptions options;
  options.stdin_path = test.stdin_path;
  options.timeout = std::chrono::milliseconds(static_cast<long long>(std::ceil(test.timeout_s * 1000.0)));
  const auto r = detail::run_process(argv, options);

  Verdict v;
  v.exit_code = r.exit_code;
  v.signal = r.signal;
  v.stdout_digest = sha256_digest(r.output);
  if (r.timed_out) {
    v.reason = FailReason::Timeout;
    return v;
  }
  if (r.signaled) {
    v.reason = FailReason::Crash;
    return v;
  }
  const bool crash_only =
      test.expect.crash_signal && !test.expect.exit_code && !test.expect.stdout_digest;
  if (comparator == Comparator::CrashSignal || crash_only) {
    v.pass = true;
    return v;
  }
  if (r.exit_code != test.expect.exit_code.value_or(0)) {
    v.reason = FailReason::ExitCode;
    return v;
  }
  if (comparator == Comparator::ExitCodeDigest && test.expect.stdout_digest &&
      *test.expect.stdout_digest != v.stdout_digest) {
    v.reason = FailReason::Digest;
    return v;
  }
  v.pass = true;
  return v;
}

std::vector<Outcome> run_suite(const std::string& binary, const Suite& suite, Comparator comparator) {
  std::vector<Outcome> out;
  for (const auto& t : suite.tests) out.push_back({t.id, t.kind, run_test(binary, t, comparator)});
  return out;
}

EquivalenceReport compare(const std::vector<Outcome>& original, const std::vector<Outcome>& patched) {
  std::map<std::string, const Outcome*> after;
  for (const auto& o : patched) {
    if (!after.emplace(o.id, &o).second) throw Error(Errc::SuiteMismatch, "duplicate id " + o.id);
  }
  if (after.size() != original.size()) throw Error(Errc::SuiteMismatch, "suites have different sizes");

  EquivalenceReport report;
  bool identical = true;
  bool regressed = false;
  bool positives_identical = true;
  bool negatives_fixed = true;
  std::set<std::string> seen;
  for (const auto& o : original) {
    if (!seen.insert(o.id).second) throw Error(Errc::SuiteMismatch, "duplicate id " + o.id);
    const auto it = after.find(o.id);
    if (it == after.end()) throw Error(Errc::SuiteMismatch, o.id + " missing from the patched run");
    if (it->second->kind != o.kind) throw Error(Errc::SuiteMismatch, o.id + " changes kind");
    const bool before_pass = o.verdict.pass;
    const bool after_pass = it->second->verdict.pass;
    identical = identical && before_pass == after_pass;
    if (o.kind == TestKind::Positive) {
      positives_identical = positives_identical && before_pass == after_pass;
      regressed = regressed || (before_pass && !after_pass);
    } else {
      negatives_fixed = negatives_fixed && !before_pass && after_pass;
    }
    report.pairs.push_back({o.id, o.kind, o.verdict, it->second->verdict});
  }
  std::sort(report.pairs.begin(), report.pairs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  if (identical) report.classification = Classification::TestEquivalent;
  else if (regressed) report.classification = Classification::Regressed;
  else if (positives_identical && negatives_fixed) report.classification = Classification::Mitigated;
  else report.classification = Classification::BehaviorChanged;
  return report;
}

namespace {

nlohmann::ordered_json verdict_json(const Verdict& v) {
  nlohmann::ordered_json j;
  j["verdict"] = v.pass ? "pass" : "fail";
  j["reason"] = to_string(v.reason);
  if (v.reason == FailReason::Crash) j["signal"] = v.signal;
  else j["exit_code"] = v.exit_code;
  j["stdout_digest"] = v.stdout_digest;
  return j;
}

}  // namespace

std::string to_json(const EquivalenceReport& report) {
  nlohmann::ordered_json j;
  j["classification"] = to_string(report.classification);
  auto& tests = j["tests"] = nlohmann::ordered_json::array();
  for (const auto& p : report.pairs) {
    nlohmann::ordered_json t;
    t["id"] = p.id;
    t["kind"] = spectra::to_string(p.kind);
    t["original"] = verdict_json(p.original);
    t["patched"] = verdict_json(p.patched);
    tests.push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

}  // namespace prd::harness
