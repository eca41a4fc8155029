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

#include "prd/rankagg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "prd/error.hpp"

namespace prd::rankagg {

std::size_t select_k(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(Errc::InvalidFraction, "fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  if (n == 0) return 0;
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  return std::max<std::size_t>(1, k);
}

namespace {

bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return a.name < b.name;
}

}  // namespace

RankedList aggregate(const RankMatrix& matrix, std::size_t k) {
  if (matrix.names.size() != matrix.weights.size()) {
    throw Error(Errc::ShapeMismatch, "name and weight matrices have different row counts");
  }
  // Contributions are summed in sorted order so the total does not depend on
  // the order of metric rows (floating-point addition is not associative).
  std::map<std::string, std::vector<double>> contributions;
  for (std::size_t row = 0; row < matrix.names.size(); ++row) {
    const auto& names = matrix.names[row];
    const auto& weights = matrix.weights[row];
    if (names.size() != weights.size()) {
      throw Error(Errc::ShapeMismatch, "row " + std::to_string(row) + " has " + std::to_string(names.size()) +
                                           " names but " + std::to_string(weights.size()) + " weights");
    }
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!std::isfinite(weights[i])) {
        throw Error(Errc::NonFiniteWeight, "row " + std::to_string(row) + " weight for " + names[i]);
      }
      if (i > 0 && weights[i] > weights[i - 1]) {
        throw Error(Errc::UnsortedRow, "row " + std::to_string(row) + " increases at " + names[i]);
      }
      if (!seen.insert(names[i]).second) {
        throw Error(Errc::ShapeMismatch, "row " + std::to_string(row) + " repeats " + names[i]);
      }
      contributions[names[i]].push_back(weights[i]);
    }
  }

  std::vector<RankedEntry> all;
  all.reserve(contributions.size());
  for (auto& [name, values] : contributions) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += v;
    all.push_back({name, total});
  }
  std::sort(all.begin(), all.end(), ranks_before);

  RankedList out;
  out.k = k;
  const auto take = std::min(k, all.size());
  out.entries.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
  return out;
}

RankMatrix rank_matrix(const sbfl::ScoreTable& table) {
  RankMatrix m;
  for (sbfl::Metric metric : sbfl::kAllMetrics) {
    const auto col = static_cast<std::size_t>(metric);
    double largest_finite = 0.0;
    bool any_finite = false;
    for (const auto& [name, row] : table.scores) {
      if (std::isfinite(row[col])) {
        largest_finite = any_finite ? std::max(largest_finite, row[col]) : row[col];
        any_finite = true;
      }
    }
    const double infinity_weight = (any_finite ? largest_finite : 0.0) + 1.0;

    std::vector<RankedEntry> column;
    for (const auto& [name, row] : table.scores) {
      const double v = row[col];
      if (std::isnan(v)) continue;
      column.push_back({name, std::isinf(v) && v > 0 ? infinity_weight : v});
    }
    std::sort(column.begin(), column.end(), ranks_before);

    auto& names = m.names.emplace_back();
    auto& weights = m.weights.emplace_back();
    for (auto& e : column) {
      names.push_back(std::move(e.name));
      weights.push_back(e.weight);
    }
  }
  return m;
}

RankedList cgfl(const spectra::CoverageMatrix& matrix, const sbfl::ScreeningConfig& config, double fraction) {
  const auto qualified = sbfl::screen(matrix.functions(), config);
  const auto k = select_k(qualified.size(), fraction);
  const auto table = sbfl::score_table(matrix, qualified);
  auto list = aggregate(rank_matrix(table), k);
  list.fraction = fraction;
  return list;
}

std::string to_json(const RankedList& list) {
  nlohmann::ordered_json j;
  j["k"] = list.k;
  j["fraction"] = list.fraction;
  auto& ranked = j["ranked"] = nlohmann::ordered_json::array();
  for (const auto& e : list.entries) {
    nlohmann::ordered_json item;
    item["name"] = e.name;
    item["weight"] = e.weight;
    ranked.push_back(std::move(item));
  }
  return j.dump(2) + "\n";
}

RankedList ranked_list_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RankedList list;
    list.k = j.at("k").get<std::size_t>();
    list.fraction = j.at("fraction").get<double>();
    for (const auto& item : j.at("ranked")) {
      list.entries.push_back({item.at("name").get<std::string>(), item.at("weight").get<double>()});
    }
    return list;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedSpectra, std::string("bad CGFL document: ") + e.what());
  }
}

}  // namespace prd::rankagg
