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

#include "support.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prd::testing {
namespace fs = std::filesystem;

fs::path data_dir() { return PRD_TEST_DATA_DIR; }
fs::path fixture_dir() { return PRD_TEST_FIXTURE_DIR; }
fs::path golden_dir() { return PRD_TEST_GOLDEN_DIR; }

std::vector<fs::path> corpus_elf_files() {
  std::vector<fs::path> out;
  for (const auto& entry : fs::recursive_directory_iterator(data_dir())) {
    if (!entry.is_regular_file() || entry.path().parent_path().filename() == "traces") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && magic[0] == 0x7f && magic[1] == 'E' && magic[2] == 'L' && magic[3] == 'F') {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

bool tool_available(const std::string& name) {
  int status = 0;
  capture("command -v " + name + " >/dev/null 2>&1", &status);
  return status == 0;
}

bool m32_toolchain_available() {
  static const bool available = [] {
    int status = 0;
    capture("echo 'int f(void){return 0;}' | gcc -m32 -ffreestanding -nostdlib -c -x c - -o /dev/null 2>/dev/null",
            &status);
    return status == 0;
  }();
  return available;
}

std::string capture(const std::string& command, int* status) {
  std::string out;
  FILE* p = ::popen(command.c_str(), "r");
  if (!p) {
    if (status) *status = -1;
    return out;
  }
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int rc = ::pclose(p);
  if (status) *status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return out;
}

TempDir::TempDir() {
  std::string templ = (fs::temp_directory_path() / "prd-test-XXXXXX").string();
  if (!::mkdtemp(templ.data())) throw std::runtime_error("mkdtemp failed");
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

rankagg::RankMatrix square_rabbit_rows() {
  rankagg::RankMatrix m;
  m.names = {
      {"cgc_remove_card", "cgc_split", "cgc_remove_from_blist", "cgc_stand", "cgc_is_player_finished",
       "cgc_calc_score", "cgc_dealer_hit"},
      {"cgc_remove_card", "cgc_split", "cgc_remove_from_blist", "cgc_stand", "cgc_print_winner",
       "cgc_check_player_squarerabbit", "cgc_new_srabbit_game"},
      {"cgc_split", "cgc_remove_card", "cgc_remove_from_blist", "cgc_stand", "cgc_can_split", "cgc_get_card",
       "cgc_print_cards"},
      {"cgc_split", "cgc_remove_card", "cgc_remove_from_blist", "cgc_stand", "cgc_calc_score",
       "cgc_shuffle_deck_if_needed", "cgc_discard_hand"},
      {"cgc_remove_card", "cgc_split", "cgc_remove_from_blist", "cgc_stand", "cgc_dealer_hit", "cgc_print_cards",
       "cgc_cardtos"},
  };
  m.weights = {
      {1, 1, 0.885, 0.858, 0.852, 0.852, 0.852},
      {1, 1, 0.718, 0.676, 0.667, 0.667, 0.667},
      {1, 1, 0.875, 0.842, 0.833, 0.833, 0.833},
      {1, 1, 0.516, 0.457, 0.444, 0.444, 0.444},
      {1, 1, 0.500, 0.441, 0.429, 0.429, 0.429},
  };
  return m;
}

spectra::SpectrumCounts random_counts(std::mt19937& rng, std::uint64_t max_count) {
  std::uniform_int_distribution<std::uint64_t> d(0, max_count);
  spectra::SpectrumCounts c{d(rng), d(rng), d(rng), d(rng)};
  // Bias toward the boundary cases the sentinels care about.
  switch (rng() % 8) {
    case 0: c.ep = 0; break;
    case 1: c.nf = 0; c.ef = std::max<std::uint64_t>(c.ef, 1); break;
    case 2: c.ep = 0; c.nf = 0; c.ef = std::max<std::uint64_t>(c.ef, 1); break;
    case 3: c.ef = 0; break;
    default: break;
  }
  if (c.ef + c.nf == 0) c.nf = 1;
  return c;
}

SeededMatrix seeded_matrix(std::mt19937& rng) {
  const int n_functions = std::uniform_int_distribution<int>(10, 60)(rng);
  const int n_fail = std::uniform_int_distribution<int>(1, 4)(rng);
  const int n_pass = std::uniform_int_distribution<int>(10, 60)(rng);
  const int fault = std::uniform_int_distribution<int>(0, n_functions - 1)(rng);

  std::vector<spectra::FunctionRecord> functions;
  for (int i = 0; i < n_functions; ++i) {
    functions.push_back({(i < 10 ? "f0" : "f") + std::to_string(i), 64, false, true});
  }
  // Per-function coverage probability; a few always-run functions (main-like).
  std::vector<double> p(n_functions);
  for (auto& v : p) v = rng() % 5 == 0 ? 1.0 : std::uniform_real_distribution<double>(0.05, 0.8)(rng);

  std::vector<spectra::TestRecord> tests;
  const int fault_pass_max = n_pass / 5;
  std::vector<int> order(n_pass);
  for (int i = 0; i < n_pass; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const int fault_pass = std::uniform_int_distribution<int>(0, fault_pass_max)(rng);
  std::vector<bool> pass_covers_fault(n_pass, false);
  for (int i = 0; i < fault_pass; ++i) pass_covers_fault[order[i]] = true;

  for (int t = 0; t < n_fail + n_pass; ++t) {
    spectra::TestRecord rec;
    const bool failing = t < n_fail;
    rec.id = (failing ? "n" : "p") + std::to_string(t);
    rec.kind = failing ? spectra::TestKind::Negative : spectra::TestKind::Positive;
    rec.verdict = failing ? spectra::Verdict::Fail : spectra::Verdict::Pass;
    for (int f = 0; f < n_functions; ++f) {
      bool covered;
      if (f == fault) covered = failing || pass_covers_fault[t - n_fail];
      else covered = std::bernoulli_distribution(p[f])(rng);
      if (covered) rec.covered.insert(functions[f].name);
    }
    tests.push_back(std::move(rec));
  }
  return {spectra::make_matrix(functions, std::move(tests)), functions[fault].name};
}

}  // namespace prd::testing
