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

// Shared helpers for the test and acceptance binaries.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "prd/rankagg.hpp"
#include "prd/spectra.hpp"

namespace prd::testing {

std::filesystem::path data_dir();     // checked-in binaries and traces
std::filesystem::path fixture_dir();  // fixture sources, manifests, suites
std::filesystem::path golden_dir();

// ELF files checked into the data directory (fixture executables, the
// shared library, the stripped variant).
std::vector<std::filesystem::path> corpus_elf_files();

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

bool tool_available(const std::string& name);
// gcc can compile freestanding i386 objects.
bool m32_toolchain_available();

// Runs a shell command, returning its stdout; `status` receives the exit code.
std::string capture(const std::string& command, int* status = nullptr);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

// Square_Rabbit's top-7 columns, one row per metric.
rankagg::RankMatrix square_rabbit_rows();

spectra::SpectrumCounts random_counts(std::mt19937& rng, std::uint64_t max_count = 50);

struct SeededMatrix {
  spectra::CoverageMatrix matrix;
  std::string fault;
};

// Functions "f00".."fNN" (all qualified); the fault is covered by every
// failing test and by at most 20% of passing tests.
SeededMatrix seeded_matrix(std::mt19937& rng);

}  // namespace prd::testing
