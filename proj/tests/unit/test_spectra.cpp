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

#include <random>

#include "prd/error.hpp"
#include "prd/spectra.hpp"

namespace prd::spectra {
namespace {

FunctionRecord fn(const std::string& name, std::uint64_t size = 64) { return {name, size, false, true}; }

TestRecord test(const std::string& id, Verdict v, std::set<std::string> covered) {
  return {id, v == Verdict::Fail ? TestKind::Negative : TestKind::Positive, v, std::move(covered)};
}

TraceRun run(const std::string& id, Verdict v, CoverageMap coverage) {
  TraceRun r;
  r.meta = test(id, v, {});
  r.coverage = std::move(coverage);
  return r;
}

TEST(BuildMatrix, KeepsCoveredSetsAsGiven) {
  const auto built = build_matrix({run("t1", Verdict::Pass, {{"f", true}}),
                                   run("t2", Verdict::Fail, {{"f", true}, {"g", true}})},
                                  {fn("f"), fn("g")});
  ASSERT_EQ(built.matrix.tests().size(), 2u);
  EXPECT_EQ(built.matrix.tests()[0].covered, (std::set<std::string>{"f"}));
  EXPECT_EQ(built.matrix.tests()[1].covered, (std::set<std::string>{"f", "g"}));
  EXPECT_TRUE(built.warnings.empty());
}

TEST(BuildMatrix, UncoveredEntriesAreNotCovered) {
  const auto built = build_matrix({run("t1", Verdict::Fail, {{"f", false}, {"g", true}})}, {fn("f"), fn("g")});
  EXPECT_EQ(built.matrix.tests()[0].covered, (std::set<std::string>{"g"}));
}

TEST(BuildMatrix, DropsUndeclaredWithWarning) {
  const auto built = build_matrix({run("t1", Verdict::Fail, {{"f", true}, {"h", true}})}, {fn("f")});
  EXPECT_EQ(built.matrix.tests()[0].covered, (std::set<std::string>{"f"}));
  ASSERT_EQ(built.warnings.size(), 1u);
  EXPECT_NE(built.warnings[0].find("h"), std::string::npos);
}

TEST(BuildMatrix, StrictPolicyRejectsUndeclared) {
  try {
    build_matrix({run("t1", Verdict::Fail, {{"h", true}})}, {fn("f")}, UnknownPolicy::Error);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownFunction);
  }
}

TEST(BuildMatrix, RejectsNoRunsAndDuplicates) {
  try {
    build_matrix({}, {fn("f")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoTests);
  }
  try {
    build_matrix({run("t", Verdict::Pass, {}), run("t", Verdict::Fail, {})}, {fn("f")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateTestId);
  }
}

TEST(MakeMatrix, ValidatesNamesAndCoverage) {
  EXPECT_THROW(make_matrix({fn("f"), fn("f")}, {test("t", Verdict::Fail, {})}), Error);
  EXPECT_THROW(make_matrix({fn("f")}, {test("t", Verdict::Fail, {"g"})}), Error);
  EXPECT_THROW(make_matrix({fn("")}, {test("t", Verdict::Fail, {})}), Error);
  const auto m = make_matrix({fn("f")}, {test("a", Verdict::Fail, {"f"}), test("b", Verdict::Pass, {})});
  EXPECT_EQ(m.failing_count(), 1u);
  EXPECT_EQ(m.passing_count(), 1u);
  ASSERT_NE(m.find_function("f"), nullptr);
  EXPECT_EQ(m.find_function("g"), nullptr);
}

TEST(CountsFor, SingleFailingTest) {
  std::vector<TestRecord> tests = {test("n", Verdict::Fail, {"f"})};
  for (int i = 0; i < 100; ++i) tests.push_back(test("p" + std::to_string(i), Verdict::Pass, {}));
  const auto m = make_matrix({fn("f")}, tests);
  EXPECT_EQ(counts_for(m, "f"), (SpectrumCounts{1, 0, 0, 100}));
}

TEST(CountsFor, MixedCoverage) {
  std::vector<TestRecord> tests;
  for (int i = 0; i < 3; ++i) tests.push_back(test("n" + std::to_string(i), Verdict::Fail, i < 2 ? std::set<std::string>{"f"} : std::set<std::string>{}));
  for (int i = 0; i < 10; ++i) tests.push_back(test("p" + std::to_string(i), Verdict::Pass, i % 2 ? std::set<std::string>{"f"} : std::set<std::string>{}));
  const auto m = make_matrix({fn("f")}, tests);
  EXPECT_EQ(counts_for(m, "f"), (SpectrumCounts{2, 5, 1, 5}));
}

TEST(CountsFor, NeverCovered) {
  std::vector<TestRecord> tests = {test("n", Verdict::Fail, {})};
  for (int i = 0; i < 9; ++i) tests.push_back(test("p" + std::to_string(i), Verdict::Pass, {}));
  const auto m = make_matrix({fn("f")}, tests);
  EXPECT_EQ(counts_for(m, "f"), (SpectrumCounts{0, 0, 1, 9}));
  try {
    counts_for(m, "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownFunction);
  }
}

// Exhaustive-style randomized check against a direct double loop.
TEST(CountsFor, MatchesBruteForceRecount) {
  std::mt19937 rng(11);
  for (int iter = 0; iter < 2000; ++iter) {
    const int nf = 1 + rng() % 8, nt = 1 + rng() % 8;
    std::vector<FunctionRecord> fns;
    for (int i = 0; i < nf; ++i) fns.push_back(fn("f" + std::to_string(i)));
    std::vector<bool> cover(nf * nt);
    std::vector<bool> failing(nt);
    std::vector<TraceRun> runs;
    for (int t = 0; t < nt; ++t) {
      failing[t] = rng() % 2;
      CoverageMap cm;
      for (int f = 0; f < nf; ++f) {
        cover[t * nf + f] = rng() % 2;
        cm[fns[f].name] = cover[t * nf + f];
      }
      runs.push_back(run("t" + std::to_string(t), failing[t] ? Verdict::Fail : Verdict::Pass, cm));
    }
    const auto m = build_matrix(runs, fns).matrix;
    for (int f = 0; f < nf; ++f) {
      SpectrumCounts want;
      for (int t = 0; t < nt; ++t) {
        const bool c = cover[t * nf + f];
        if (failing[t]) (c ? want.ef : want.nf)++;
        else (c ? want.ep : want.np)++;
      }
      const auto got = counts_for(m, fns[f].name);
      ASSERT_EQ(got, want);
      ASSERT_EQ(got.ef + got.nf, m.failing_count());
      ASSERT_EQ(got.ep + got.np, m.passing_count());
    }
  }
}

TEST(SpectraJson, RoundTripsAndKeepsKeyOrder) {
  const SpectraDocument doc{"bin", make_matrix({{"f", 50, false, true}, {"memcpy", 90, true, false}},
                                               {test("n1", Verdict::Fail, {"f"}), test("p1", Verdict::Pass, {"f", "memcpy"})})};
  const auto text = to_json(doc);
  EXPECT_LT(text.find("\"binary\""), text.find("\"functions\""));
  EXPECT_LT(text.find("\"functions\""), text.find("\"tests\""));
  const auto back = spectra_from_json(text);
  EXPECT_EQ(back.binary, "bin");
  EXPECT_EQ(back.matrix.functions(), doc.matrix.functions());
  EXPECT_EQ(back.matrix.tests(), doc.matrix.tests());
  EXPECT_EQ(to_json(back), text);
}

TEST(SpectraJson, RejectsMalformed) {
  for (const char* bad : {"", "[]", R"({"binary":"b","functions":[{"name":"f"}],"tests":[]})",
                          R"({"binary":"b","functions":[],"tests":[{"id":"t","kind":"sideways","verdict":"pass","covered":[]}]})",
                          R"({"binary":"b","functions":[{"name":"f","size":-1,"library":false,"local":true}],"tests":[]})"}) {
    EXPECT_THROW(spectra_from_json(bad), Error) << bad;
  }
}

}  // namespace
}  // namespace prd::spectra
