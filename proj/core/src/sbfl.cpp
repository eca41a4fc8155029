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

#include "prd/sbfl.hpp"

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "prd/error.hpp"

namespace prd::sbfl {

std::set<std::string> screen(const std::vector<spectra::FunctionRecord>& functions,
                             const ScreeningConfig& config) {
  std::set<std::string> qualified;
  for (const auto& f : functions) {
    if (f.size_bytes < config.min_size_bytes) continue;
    if (config.cull_library && f.is_library) continue;
    if (config.require_local && !f.is_local) continue;
    qualified.insert(f.name);
  }
  return qualified;
}

std::string_view to_string(Metric metric) noexcept {
  switch (metric) {
    case Metric::Tarantula: return "tarantula";
    case Metric::Ochiai: return "ochiai";
    case Metric::Op2: return "op2";
    case Metric::Barinel: return "barinel";
    case Metric::DStar2: return "dstar2";
  }
  return "?";
}

Metric metric_from_string(std::string_view name) {
  for (Metric m : kAllMetrics) {
    if (to_string(m) == name) return m;
  }
  throw Error(Errc::UnknownMetric, std::string(name));
}

double suspiciousness(Metric metric, const spectra::SpectrumCounts& c) {
  const double ef = static_cast<double>(c.ef);
  const double ep = static_cast<double>(c.ep);
  const double nf = static_cast<double>(c.nf);
  const double np = static_cast<double>(c.np);
  const double failing = ef + nf;
  const double passing = ep + np;
  if (c.ef + c.nf == 0) {
    throw Error(Errc::NoFailingTests, "suite has no failing test");
  }

  switch (metric) {
    case Metric::Tarantula: {
      if (c.ef == 0) return 0.0;
      const double fail_ratio = ef / failing;
      const double pass_ratio = passing == 0.0 ? 0.0 : ep / passing;
      return fail_ratio / (fail_ratio + pass_ratio);
    }
    case Metric::Ochiai:
      if (c.ef == 0) return 0.0;
      return ef / std::sqrt(failing * (ef + ep));
    case Metric::Op2:
      return ef - ep / (passing + 1.0);
    case Metric::Barinel:
      if (c.ef + c.ep == 0) return 0.0;
      return 1.0 - ep / (ep + ef);
    case Metric::DStar2:
      if (c.ef == 0) return 0.0;
      if (c.ep + c.nf == 0) return std::numeric_limits<double>::infinity();
      return ef * ef / (ep + nf);
  }
  throw Error(Errc::UnknownMetric, "metric id out of range");
}

double ScoreTable::at(const std::string& function, Metric metric) const {
  auto it = scores.find(function);
  if (it == scores.end()) throw Error(Errc::UnknownFunction, function);
  return it->second[static_cast<std::size_t>(metric)];
}

ScoreTable score_table(const spectra::CoverageMatrix& matrix, const std::set<std::string>& qualified) {
  if (matrix.failing_count() == 0) throw Error(Errc::NoFailingTests, "suite has no failing test");
  if (qualified.empty()) throw Error(Errc::EmptyQualifiedSet, "no function passed screening");
  ScoreTable table;
  for (const auto& name : qualified) {
    const auto counts = spectra::counts_for(matrix, name);
    std::array<double, 5> row{};
    for (Metric m : kAllMetrics) row[static_cast<std::size_t>(m)] = suspiciousness(m, counts);
    table.scores.emplace(name, row);
  }
  return table;
}

std::string to_json(const ScoreTable& table) {
  nlohmann::ordered_json j;
  auto& order = j["metric_order"] = nlohmann::ordered_json::array();
  for (Metric m : kAllMetrics) order.push_back(std::string(to_string(m)));
  auto& scores = j["scores"] = nlohmann::ordered_json::object();
  for (const auto& [name, row] : table.scores) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for (Metric m : kAllMetrics) {
      const double v = row[static_cast<std::size_t>(m)];
      if (std::isnan(v)) continue;
      if (std::isinf(v)) {
        entry[std::string(to_string(m))] = "inf";
      } else {
        entry[std::string(to_string(m))] = v;
      }
    }
    scores[name] = std::move(entry);
  }
  return j.dump(2) + "\n";
}

ScoreTable score_table_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedSpectra, e.what());
  }
  if (!j.is_object() || !j.contains("scores") || !j["scores"].is_object()) {
    throw Error(Errc::MalformedSpectra, "score table needs a 'scores' object");
  }
  ScoreTable table;
  for (const auto& [name, entry] : j["scores"].items()) {
    std::array<double, 5> row;
    row.fill(std::numeric_limits<double>::quiet_NaN());
    if (!entry.is_object()) throw Error(Errc::MalformedSpectra, "scores." + name + " is not an object");
    for (const auto& [metric, value] : entry.items()) {
      const auto idx = static_cast<std::size_t>(metric_from_string(metric));
      if (value.is_string() && value.get<std::string>() == "inf") {
        row[idx] = std::numeric_limits<double>::infinity();
      } else if (value.is_number()) {
        row[idx] = value.get<double>();
      } else {
        throw Error(Errc::MalformedSpectra, "scores." + name + "." + metric + " is not a number");
      }
    }
    table.scores.emplace(name, row);
  }
  return table;
}

}  // namespace prd::sbfl
