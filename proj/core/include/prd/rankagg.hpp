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

// Rank aggregation: consolidates the per-metric orderings into one
// prioritized list of suspicious functions (weighted Borda summation).

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "prd/sbfl.hpp"
#include "prd/spectra.hpp"

namespace prd::rankagg {

inline constexpr double kDefaultFraction = 0.35;

struct RankedEntry {
  std::string name;
  double weight = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
  std::vector<RankedEntry> entries;  // weight descending, then name ascending
  std::size_t k = 0;
  double fraction = kDefaultFraction;
};

// max(1, floor(fraction * n)) for n >= 1, 0 for n == 0.
std::size_t select_k(std::size_t n, double fraction);

// One row per metric: names ordered by that metric's score, and the matching
// weights (non-increasing, finite).
struct RankMatrix {
  std::vector<std::vector<std::string>> names;
  std::vector<std::vector<double>> weights;
};

RankedList aggregate(const RankMatrix& matrix, std::size_t k);

/// Builds the name/weight rows from a score table: each metric column sorted
/// by score descending (ties by name), +infinity replaced with the column's
/// largest finite score + 1.0, NaN (missing) entries left out of the row.
RankMatrix rank_matrix(const sbfl::ScoreTable& table);

RankedList cgfl(const spectra::CoverageMatrix& matrix, const sbfl::ScreeningConfig& config,
                double fraction = kDefaultFraction);

// {"k": int, "fraction": num, "ranked": [{"name": str, "weight": num}]}
std::string to_json(const RankedList& list);
RankedList ranked_list_from_json(std::string_view text);

}  // namespace prd::rankagg
