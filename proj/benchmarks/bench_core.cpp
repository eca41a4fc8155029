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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <random>

#include "prd/detour.hpp"
#include "prd/elf.hpp"
#include "prd/rankagg.hpp"
#include "prd/sbfl.hpp"
#include "prd/spectra.hpp"

namespace {

using namespace prd;

void BM_Suspiciousness(benchmark::State& state) {
  const auto metric = static_cast<sbfl::Metric>(state.range(0));
  std::mt19937 rng(1);
  std::vector<spectra::SpectrumCounts> counts(1024);
  for (auto& c : counts) c = {rng() % 50, rng() % 50, rng() % 50, rng() % 50};
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sbfl::suspiciousness(metric, counts[i++ & 1023]));
}
BENCHMARK(BM_Suspiciousness)->DenseRange(0, 4);

rankagg::RankMatrix random_rows(std::size_t n) {
  std::mt19937 rng(2);
  rankagg::RankMatrix m;
  for (int row = 0; row < 5; ++row) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
    std::shuffle(names.begin(), names.end(), rng);
    std::vector<double> w;
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) w.push_back(d(rng));
    std::sort(w.rbegin(), w.rend());
    m.names.push_back(std::move(names));
    m.weights.push_back(std::move(w));
  }
  return m;
}

void BM_Aggregate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto m = random_rows(n);
  for (auto _ : state) benchmark::DoNotOptimize(rankagg::aggregate(m, rankagg::select_k(n, rankagg::kDefaultFraction)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Aggregate)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_Cgfl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937 rng(3);
  std::vector<spectra::FunctionRecord> fns;
  for (std::size_t i = 0; i < n; ++i) fns.push_back({"f" + std::to_string(i), 64, false, true});
  std::vector<spectra::TestRecord> tests;
  for (int t = 0; t < 40; ++t) {
    spectra::TestRecord rec{"t" + std::to_string(t), spectra::TestKind::Positive,
                            t < 4 ? spectra::Verdict::Fail : spectra::Verdict::Pass, {}};
    for (const auto& f : fns) {
      if (rng() % 3 == 0) rec.covered.insert(f.name);
    }
    tests.push_back(std::move(rec));
  }
  const auto matrix = spectra::make_matrix(fns, tests);
  for (auto _ : state) benchmark::DoNotOptimize(rankagg::cgfl(matrix, {}));
}
BENCHMARK(BM_Cgfl)->Arg(64)->Arg(512);

std::vector<std::uint8_t> read_bench_elf() {
  std::ifstream in(PRD_BENCH_ELF, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void BM_ParseElf(benchmark::State& state) {
  const auto bytes = read_bench_elf();
  if (bytes.empty()) {
    state.SkipWithError("fixture binary missing");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(elf::parse_elf(bytes));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_ParseElf);

void BM_RoundTripElf(benchmark::State& state) {
  const auto bytes = read_bench_elf();
  if (bytes.empty()) {
    state.SkipWithError("fixture binary missing");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(elf::serialize_elf(elf::parse_elf(bytes)));
}
BENCHMARK(BM_RoundTripElf);

void BM_EncodeTrampoline(benchmark::State& state) {
  detour::DetourPlan plan;
  plan.function.address = 0x08049100;
  for (int i = 0; i < state.range(0); ++i) {
    plan.references.push_back({"r" + std::to_string(i), detour::ReferenceKind::LocalFunction,
                               static_cast<elf::Address>(0x08050000 + 16 * i)});
  }
  plan.budget_bytes = 4096;
  for (auto _ : state) benchmark::DoNotOptimize(detour::encode_trampoline(plan, 0x0805a123));
}
BENCHMARK(BM_EncodeTrampoline)->Arg(0)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
