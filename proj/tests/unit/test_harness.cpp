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

#include <gtest/gtest.h>

#include <chrono>
#include <functional>
#include <nlohmann/json.hpp>

#include "prd/error.hpp"
#include "prd/harness.hpp"
#include "support.hpp"

namespace prd::harness {
namespace {

std::optional<Errc> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

TestSpec shell(const std::string& script) {
  TestSpec t;
  t.id = "t";
  t.command = {"/bin/sh", "-c", script};
  return t;
}

// Reference digest from the coreutils tool.
std::string sha256sum(const std::string& data) {
  testing::TempDir dir;
  testing::write_file(dir.path() / "d", data);
  const auto out = testing::capture("sha256sum " + (dir.path() / "d").string());
  return "sha256:" + out.substr(0, 64);
}

TEST(Digest, MatchesSha256sum) {
  if (!testing::tool_available("sha256sum")) GTEST_SKIP();
  for (const std::string& s : std::vector<std::string>{"", "abc", "hello\nworld\n", std::string(1000, 'x')}) {
    EXPECT_EQ(sha256_digest(s), sha256sum(s));
  }
  EXPECT_EQ(sha256_digest("abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(RunTest, ExitCodeAndDigest) {
  auto t = shell("printf hi; exit 3");
  t.expect.exit_code = 3;
  t.expect.stdout_digest = sha256_digest("hi");
  auto v = run_test("", t);
  EXPECT_TRUE(v.pass);
  EXPECT_EQ(v.exit_code, 3);
  EXPECT_EQ(v.stdout_digest, sha256_digest("hi"));

  t.expect.stdout_digest = sha256_digest("ho");
  v = run_test("", t);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, FailReason::Digest);
  EXPECT_TRUE(run_test("", t, Comparator::ExitCode).pass);

  t.expect.exit_code = 0;
  EXPECT_EQ(run_test("", t, Comparator::ExitCode).reason, FailReason::ExitCode);
}

TEST(RunTest, MissingExitCodeMeansZero) {
  EXPECT_TRUE(run_test("", shell("true")).pass);
  EXPECT_EQ(run_test("", shell("exit 1")).reason, FailReason::ExitCode);
}

TEST(RunTest, CrashIsFailure) {
  auto t = shell("kill -SEGV $$");
  const auto v = run_test("", t);
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, FailReason::Crash);
  EXPECT_EQ(v.signal, 11);
  // A crash-only expectation passes when the process survives.
  t = shell("exit 0");
  t.kind = TestKind::Negative;
  t.expect.crash_signal = 11;
  EXPECT_TRUE(run_test("", t).pass);
  t = shell("exit 4");
  t.expect.crash_signal = 11;
  EXPECT_TRUE(run_test("", t).pass);
  EXPECT_TRUE(run_test("", shell("exit 4"), Comparator::CrashSignal).pass);
  EXPECT_FALSE(run_test("", shell("kill -ABRT $$"), Comparator::CrashSignal).pass);
}

TEST(RunTest, TimeoutKillsTheChild) {
  auto t = shell("sleep 30");
  t.timeout_s = 0.3;
  const auto start = std::chrono::steady_clock::now();
  const auto v = run_test("", t);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_FALSE(v.pass);
  EXPECT_EQ(v.reason, FailReason::Timeout);
  EXPECT_LT(elapsed, std::chrono::seconds(10));
}

TEST(RunTest, StdinAndBinaryToken) {
  testing::TempDir dir;
  testing::write_file(dir.path() / "in.txt", "payload-bytes");
  TestSpec t;
  t.id = "cat";
  t.command = {"{binary}"};
  t.stdin_path = (dir.path() / "in.txt").string();
  t.expect.stdout_digest = sha256_digest("payload-bytes");
  EXPECT_TRUE(run_test("/bin/cat", t).pass);

  t.command = {"/bin/echo", "x{binary}y{binary}"};
  t.stdin_path.reset();
  t.expect.stdout_digest = sha256_digest("x/bin/truey/bin/true\n");
  EXPECT_TRUE(run_test("/bin/true", t).pass);
}

TEST(RunTest, LargeOutputDoesNotDeadlock) {
  auto t = shell("head -c 3000000 /dev/zero");
  t.expect.stdout_digest = sha256_digest(std::string(3000000, '\0'));
  EXPECT_TRUE(run_test("", t).pass);
}

TEST(RunTest, SpawnFailure) {
  TestSpec t;
  t.id = "x";
  t.command = {"{binary}"};
  const auto v = [&] {
    try {
      return std::optional<Verdict>(run_test("/nonexistent/prog", t));
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::SpawnFailure);
      return std::optional<Verdict>();
    }
  }();
  if (v) {
    EXPECT_FALSE(v->pass);
  }
  t.command.clear();
  EXPECT_EQ(code_of([&] { run_test("/bin/true", t); }), Errc::SpawnFailure);
}

std::string fixture_text(const std::string& name) {
  const auto b = testing::read_file(testing::fixture_dir() / name / "suite.json");
  return {b.begin(), b.end()};
}

TEST(Suite, FixtureSuitesParse) {
  for (const char* name : {"greet", "rabbit", "ledger", "tally", "labels"}) {
    const auto suite = suite_from_json(fixture_text(name), (testing::fixture_dir() / name).string());
    std::size_t pos = 0, neg = 0;
    for (const auto& t : suite.tests) {
      (t.kind == TestKind::Positive ? pos : neg)++;
      ASSERT_TRUE(t.stdin_path.has_value());
      EXPECT_TRUE(std::filesystem::exists(*t.stdin_path)) << *t.stdin_path;
      EXPECT_TRUE(t.recorded_verdict.has_value());
    }
    EXPECT_GE(pos, 9u) << name;
    EXPECT_GE(neg, 1u) << name;
  }
}

TEST(Suite, RecordedBehaviorReproduces) {
  for (const char* name : {"greet", "tally"}) {
    const auto suite = suite_from_json(fixture_text(name), (testing::fixture_dir() / name).string());
    const auto binary = (testing::data_dir() / name / name).string();
    for (const auto& o : run_suite(binary, suite)) {
      const auto& t = *std::find_if(suite.tests.begin(), suite.tests.end(), [&](const auto& x) { return x.id == o.id; });
      EXPECT_EQ(o.verdict.pass, *t.recorded_verdict == spectra::Verdict::Pass) << name << "/" << o.id;
      if (o.kind == TestKind::Negative) {
        EXPECT_EQ(o.verdict.signal, 11);
      }
    }
  }
}

TEST(Suite, Deterministic) {
  const auto suite = suite_from_json(fixture_text("rabbit"), (testing::fixture_dir() / "rabbit").string());
  const auto binary = (testing::data_dir() / "rabbit" / "rabbit").string();
  const auto a = run_suite(binary, suite);
  const auto b = run_suite(binary, suite);
  EXPECT_EQ(to_json(compare(a, b)), to_json(compare(b, a)));
  EXPECT_EQ(compare(a, b).classification, Classification::TestEquivalent);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].verdict.stdout_digest, b[i].verdict.stdout_digest);
}

TEST(Suite, RejectsMalformed) {
  for (const char* text :
       {"", "{}", "{\"tests\": 3}", "{\"tests\": [{\"id\": \"a\"}]}",
        "{\"tests\": [{\"id\": \"a\", \"kind\": \"odd\", \"cmd\": [\"x\"]}]}",
        "{\"tests\": [{\"id\": \"a\", \"kind\": \"positive\", \"cmd\": []}]}",
        "{\"tests\": [{\"id\": \"a\", \"kind\": \"positive\", \"cmd\": [\"x\"], \"timeout_s\": 0}]}",
        "{\"tests\": [{\"id\": \"a\", \"kind\": \"positive\", \"cmd\": [\"x\"], \"verdict\": \"maybe\"}]}",
        "{\"tests\": [{\"id\": \"a\", \"kind\": \"positive\", \"cmd\": [\"x\"]},"
        " {\"id\": \"a\", \"kind\": \"positive\", \"cmd\": [\"x\"]}]}"}) {
    EXPECT_EQ(code_of([&] { suite_from_json(text); }), Errc::MalformedSuite) << text;
  }
}

TEST(Comparators, Names) {
  for (auto c : {Comparator::ExitCode, Comparator::ExitCodeDigest, Comparator::CrashSignal}) {
    EXPECT_EQ(comparator_from_string(to_string(c)), c);
  }
  EXPECT_EQ(to_string(Comparator::ExitCodeDigest), "exit_code_digest");
  EXPECT_THROW(comparator_from_string("fuzzy"), Error);
}

Outcome outcome(const std::string& id, TestKind kind, bool pass) {
  return {id, kind, pass ? Verdict::passed() : Verdict::failed(FailReason::Crash)};
}

// Reference classification, written from the definitions.
Classification expected_class(const std::vector<bool>& pos_before, const std::vector<bool>& pos_after,
                              const std::vector<bool>& neg_before, const std::vector<bool>& neg_after) {
  if (pos_before == pos_after && neg_before == neg_after) return Classification::TestEquivalent;
  for (std::size_t i = 0; i < pos_before.size(); ++i) {
    if (pos_before[i] && !pos_after[i]) return Classification::Regressed;
  }
  bool fixed = pos_before == pos_after;
  for (std::size_t i = 0; i < neg_before.size(); ++i) fixed = fixed && !neg_before[i] && neg_after[i];
  return fixed ? Classification::Mitigated : Classification::BehaviorChanged;
}

TEST(Compare, ExhaustiveSmallSuites) {
  // Two positives and two negatives: every combination of before/after.
  for (unsigned mask = 0; mask < 256; ++mask) {
    auto bit = [&](int i) { return ((mask >> i) & 1u) != 0; };
    const std::vector<bool> pb = {bit(0), bit(1)}, pa = {bit(2), bit(3)}, nb = {bit(4), bit(5)}, na = {bit(6), bit(7)};
    std::vector<Outcome> before, after;
    for (int i = 0; i < 2; ++i) {
      before.push_back(outcome("p" + std::to_string(i), TestKind::Positive, pb[i]));
      after.push_back(outcome("p" + std::to_string(i), TestKind::Positive, pa[i]));
      before.push_back(outcome("n" + std::to_string(i), TestKind::Negative, nb[i]));
      after.push_back(outcome("n" + std::to_string(i), TestKind::Negative, na[i]));
    }
    std::reverse(after.begin(), after.end());  // order must not matter
    EXPECT_EQ(compare(before, after).classification, expected_class(pb, pa, nb, na)) << mask;
  }
}

TEST(Compare, Mismatches) {
  const std::vector<Outcome> a = {outcome("x", TestKind::Positive, true)};
  EXPECT_EQ(code_of([&] { compare(a, {}); }), Errc::SuiteMismatch);
  EXPECT_EQ(code_of([&] { compare(a, {outcome("y", TestKind::Positive, true)}); }), Errc::SuiteMismatch);
  EXPECT_EQ(code_of([&] { compare(a, {outcome("x", TestKind::Negative, true)}); }), Errc::SuiteMismatch);
  const std::vector<Outcome> dup = {outcome("x", TestKind::Positive, true), outcome("x", TestKind::Positive, true)};
  EXPECT_EQ(code_of([&] { compare(dup, dup); }), Errc::SuiteMismatch);
}

TEST(Compare, ReportJson) {
  const std::vector<Outcome> before = {outcome("p1", TestKind::Positive, true), outcome("n1", TestKind::Negative, false)};
  const std::vector<Outcome> after = {outcome("p1", TestKind::Positive, true), outcome("n1", TestKind::Negative, true)};
  const auto j = nlohmann::json::parse(to_json(compare(before, after)));
  EXPECT_EQ(j["classification"], "mitigated");
  ASSERT_EQ(j["tests"].size(), 2u);
  EXPECT_EQ(j["tests"][0]["id"], "n1");
}

}  // namespace
}  // namespace prd::harness
