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

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prd/spectra.hpp"

namespace prd::sbfl {

struct ScreeningConfig {
  std::uint64_t min_size_bytes = 45;
  bool cull_library = true;
  bool require_local = true;
};

// Functions eligible for detouring: large enough to hold a trampoline, not
// part of the C library, and defined in the binary itself.
std::set<std::string> screen(const std::vector<spectra::FunctionRecord>& functions,
                             const ScreeningConfig& config = {});

enum class Metric { Tarantula, Ochiai, Op2, Barinel, DStar2 };

inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::Tarantula, Metric::Ochiai, Metric::Op2,
                                                      Metric::Barinel, Metric::DStar2};

std::string_view to_string(Metric metric) noexcept;
Metric metric_from_string(std::string_view name);  // throws UnknownMetric

/// Raw (unnormalized) suspiciousness. DStar2 returns +infinity when the
/// function is covered by every failing test and by no passing test.
double suspiciousness(Metric metric, const spectra::SpectrumCounts& c);

struct ScoreTable {
  // Scores per function, indexed in kAllMetrics order.
  std::map<std::string, std::array<double, 5>> scores;

  double at(const std::string& function, Metric metric) const;
  std::size_t size() const noexcept { return scores.size(); }
};

ScoreTable score_table(const spectra::CoverageMatrix& matrix, const std::set<std::string>& qualified);

// {"metric_order": [...], "scores": {fn: {metric: number|"inf"}}}
std::string to_json(const ScoreTable& table);
// Tolerates functions missing some metrics (partial score tables); absent
// entries are stored as NaN.
ScoreTable score_table_from_json(std::string_view text);

}  // namespace prd::sbfl
