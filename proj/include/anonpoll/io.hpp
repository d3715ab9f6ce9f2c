// Copyright 2026 The anonpoll Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// File formats and built-in scenarios.
//
//   ListDesign JSON  {"n_parties":N,"lists":[[1,2],[1,3]],"weights":[..],
//                     "labels":[..]}, 1-based party indices.
//   PairDesign JSON  {"n_parties":N}
//   ResponseCounts   CSV with header block_label,k_index,count; k_index is
//                    1-based within the block.
//   EstimateResult   JSON with p_hat, row-major cov, n, method_tag and
//                    negative_entries.
//
// Numbers are written in shortest round-trip form, so every emitted value
// parses back to the identical double.

#ifndef ANONPOLL_IO_H_
#define ANONPOLL_IO_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "anonpoll/design.hpp"
#include "anonpoll/estimate.hpp"
#include "anonpoll/privacy.hpp"
#include "anonpoll/simulate.hpp"

namespace anonpoll {

struct Scenario {
  std::string name;
  Preferences preferences;
};

// "uniform10" or "sweden2014"; throws InvalidArgument otherwise.
Scenario BuiltinScenario(std::string_view name);
std::vector<std::string> BuiltinScenarioNames();

// A design as read from JSON: either a pair design or a list design.
struct DesignSpec {
  int n_parties = 0;
  std::optional<ListDesign> list;  // unset: pair design
  std::vector<std::string> labels;

  bool is_pair() const { return !list; }
};

DesignSpec DesignSpecFromJson(const nlohmann::json& j);
nlohmann::json PairDesignToJson(int n_parties,
                                const std::vector<std::string>& labels = {});
nlohmann::json ListDesignToJson(const ListDesign& design,
                                const std::vector<std::string>& labels = {});

std::string CountsToCsv(const ResponseCounts& counts);
// Throws FileFormatError with the offending line and column.
ResponseCounts CountsFromCsv(std::string_view text);

// Orders parsed counts by the design's block labels and checks sizes.
ResponseCounts AlignCounts(const SurveyDesign& design,
                           const ResponseCounts& counts);

std::string_view MethodTagName(MethodTag tag);
MethodTag MethodTagFromName(std::string_view name);

nlohmann::json EstimateToJson(const EstimateResult& result,
                              const std::vector<std::string>& labels = {});
EstimateResult EstimateFromJson(const nlohmann::json& j);

nlohmann::json PrivacyToJson(const PrivacyReport& report);
PrivacyReport PrivacyFromJson(const nlohmann::json& j);
nlohmann::json JeopardyToJson(const JeopardyReport& report);
JeopardyReport JeopardyFromJson(const nlohmann::json& j);

nlohmann::json MonteCarloToJson(const MonteCarloSummary& summary);

// Shortest decimal form that parses back to the same double.
std::string FormatNumber(double x);

// Numbers for JSON; non-finite values become "Infinity", "-Infinity", "NaN".
nlohmann::json NumberToJson(double x);
double NumberFromJson(const nlohmann::json& j);

}  // namespace anonpoll

#endif  // ANONPOLL_IO_H_
