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

#include "anonpoll/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "anonpoll/error.hpp"

namespace anonpoll {
namespace {

using nlohmann::json;

const char* const kCountsHeader = "block_label,k_index,count";

std::vector<double> ToStdVector(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json NumberArray(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(NumberToJson(x));
  return out;
}

std::vector<double> NumberArrayFromJson(const json& j) {
  std::vector<double> out;
  for (const json& x : j) out.push_back(NumberFromJson(x));
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

int64_t ParseInteger(std::string_view field, int line, int column,
                     const char* what) {
  field = Trim(field);
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw FileFormatError(std::string("expected an integer ") + what + ", got '" +
                              std::string(field) + "'",
                          line, column);
  }
  return value;
}

}  // namespace

std::string FormatNumber(double x) { return fmt::format("{}", x); }

json NumberToJson(double x) {
  if (std::isnan(x)) return "NaN";
  if (std::isinf(x)) return x > 0 ? "Infinity" : "-Infinity";
  return x;
}

double NumberFromJson(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
  }
  throw Error(ErrorCode::kFileFormatError, "expected a number, got " + j.dump());
}

Scenario BuiltinScenario(std::string_view name) {
  if (name == "uniform10") {
    return {"uniform10", Preferences::Uniform(10)};
  }
  if (name == "sweden2014") {
    Eigen::VectorXd p(10);
    p << 0.129, 0.310, 0.233, 0.061, 0.069, 0.057, 0.054, 0.046, 0.031, 0.010;
    return {"sweden2014",
            Preferences({"SD", "S", "M", "MP", "C", "V", "FP", "KD", "FI", "O"},
                        p)};
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown scenario '" + std::string(name) + "'");
}

std::vector<std::string> BuiltinScenarioNames() {
  return {"uniform10", "sweden2014"};
}

DesignSpec DesignSpecFromJson(const json& j) {
  if (!j.is_object() || !j.contains("n_parties") ||
      !j["n_parties"].is_number_integer()) {
    throw Error(ErrorCode::kFileFormatError,
                "design JSON needs an integer n_parties");
  }
  DesignSpec spec;
  spec.n_parties = j["n_parties"].get<int>();
  if (j.contains("labels")) {
    spec.labels = j["labels"].get<std::vector<std::string>>();
    if (static_cast<int>(spec.labels.size()) != spec.n_parties) {
      throw Error(ErrorCode::kFileFormatError,
                  "labels must name every party");
    }
  }
  if (!j.contains("lists")) {
    BuildPairDesign(spec.n_parties);  // validates N
    return spec;
  }
  std::vector<std::vector<int>> lists;
  for (const json& list : j["lists"]) {
    std::vector<int> members;
    for (const json& k : list) {
      if (!k.is_number_integer()) {
        throw Error(ErrorCode::kFileFormatError, "list entries must be integers");
      }
      members.push_back(k.get<int>() - 1);
    }
    lists.push_back(std::move(members));
  }
  std::vector<double> weights;
  if (j.contains("weights")) {
    weights = NumberArrayFromJson(j["weights"]);
  } else {
    weights.assign(lists.size(), lists.empty() ? 0.0 : 1.0 / lists.size());
  }
  spec.list = BuildCustomListDesign(spec.n_parties, std::move(lists),
                                    std::move(weights));
  return spec;
}

json PairDesignToJson(int n_parties, const std::vector<std::string>& labels) {
  json j = {{"n_parties", n_parties}};
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

json ListDesignToJson(const ListDesign& design,
                      const std::vector<std::string>& labels) {
  json lists = json::array();
  for (const auto& list : design.lists()) {
    json members = json::array();
    for (int k : list) members.push_back(k + 1);
    lists.push_back(std::move(members));
  }
  json j = {{"n_parties", design.n_parties()},
            {"lists", std::move(lists)},
            {"weights", NumberArray(design.weights())}};
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

std::string CountsToCsv(const ResponseCounts& counts) {
  std::string out = std::string(kCountsHeader) + "\n";
  for (size_t i = 0; i < counts.blocks.size(); ++i) {
    const std::string label =
        i < counts.labels.size() ? counts.labels[i] : "B" + std::to_string(i + 1);
    for (size_t k = 0; k < counts.blocks[i].size(); ++k) {
      out += fmt::format("{},{},{}\n", label, k + 1, counts.blocks[i][k]);
    }
  }
  return out;
}

ResponseCounts CountsFromCsv(std::string_view text) {
  ResponseCounts counts;
  std::map<std::string, size_t> seen;
  int line_no = 0;
  while (!text.empty()) {
    const size_t eol = text.find('\n');
    std::string_view line =
        Trim(eol == std::string_view::npos ? text : text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view() : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line == kCountsHeader) continue;

    std::vector<std::string_view> fields;
    std::vector<int> columns;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      columns.push_back(static_cast<int>(start) + 1);
      if (comma == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    if (fields.size() != 3) {
      throw FileFormatError("expected 3 fields (block_label,k_index,count), got " +
                                std::to_string(fields.size()),
                            line_no, fields.size() > 3 ? columns[3] : 1);
    }
    const std::string label(Trim(fields[0]));
    if (label.empty()) throw FileFormatError("empty block label", line_no, 1);
    const int64_t k = ParseInteger(fields[1], line_no, columns[1], "k_index");
    const int64_t c = ParseInteger(fields[2], line_no, columns[2], "count");
    if (c < 0) throw FileFormatError("negative count", line_no, columns[2]);

    auto it = seen.find(label);
    if (it == seen.end()) {
      it = seen.emplace(label, counts.blocks.size()).first;
      counts.blocks.emplace_back();
      counts.labels.push_back(label);
    } else if (it->second + 1 != counts.blocks.size()) {
      throw FileFormatError("rows of block '" + label + "' are not contiguous",
                            line_no, 1);
    }
    auto& block = counts.blocks[it->second];
    if (k != static_cast<int64_t>(block.size()) + 1) {
      throw FileFormatError("expected k_index " + std::to_string(block.size() + 1),
                            line_no, columns[1]);
    }
    block.push_back(c);
  }
  if (counts.blocks.empty()) throw FileFormatError("no count rows", line_no, 1);
  return counts;
}

ResponseCounts AlignCounts(const SurveyDesign& design,
                           const ResponseCounts& counts) {
  ResponseCounts out;
  for (const DesignBlock& b : design.blocks()) {
    size_t found = counts.labels.size();
    for (size_t i = 0; i < counts.labels.size(); ++i) {
      if (counts.labels[i] == b.label) found = i;
    }
    if (found == counts.labels.size()) {
      throw Error(ErrorCode::kLengthMismatch,
                  "counts have no block '" + b.label + "'");
    }
    if (counts.blocks[found].size() != static_cast<size_t>(b.matrix.rows())) {
      throw Error(ErrorCode::kLengthMismatch,
                  "block '" + b.label + "' needs " +
                      std::to_string(b.matrix.rows()) + " counts");
    }
    out.blocks.push_back(counts.blocks[found]);
    out.labels.push_back(b.label);
  }
  if (counts.blocks.size() != out.blocks.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "counts contain blocks the design does not have");
  }
  return out;
}

std::string_view MethodTagName(MethodTag tag) {
  switch (tag) {
    case MethodTag::kPair:
      return "pair";
    case MethodTag::kList:
      return "list";
    case MethodTag::kGeneral:
      return "general";
  }
  return "general";
}

MethodTag MethodTagFromName(std::string_view name) {
  if (name == "pair") return MethodTag::kPair;
  if (name == "list") return MethodTag::kList;
  if (name == "general") return MethodTag::kGeneral;
  throw Error(ErrorCode::kFileFormatError,
              "unknown method_tag '" + std::string(name) + "'");
}

json EstimateToJson(const EstimateResult& result,
                    const std::vector<std::string>& labels) {
  const Eigen::Index np = result.p_hat.size();
  std::vector<double> cov;
  cov.reserve(np * np);
  for (Eigen::Index i = 0; i < np; ++i) {
    for (Eigen::Index j = 0; j < np; ++j) cov.push_back(result.cov(i, j));
  }
  json j = {
      {"p_hat", NumberArray(ToStdVector(result.p_hat))},
      {"cov", NumberArray(cov)},
      {"n", result.n},
      {"method_tag", MethodTagName(result.method)},
      {"negative_entries", result.negative_entries()},
      {"covariance",
       result.cov_kind == CovarianceKind::kPlugIn ? "plug-in" : "known-p"},
      {"possibly_indefinite", result.possibly_indefinite},
  };
  if (!labels.empty()) j["labels"] = labels;
  return j;
}

EstimateResult EstimateFromJson(const json& j) {
  try {
    EstimateResult r;
    const std::vector<double> p = NumberArrayFromJson(j.at("p_hat"));
    const std::vector<double> cov = NumberArrayFromJson(j.at("cov"));
    const auto np = static_cast<Eigen::Index>(p.size());
    if (static_cast<Eigen::Index>(cov.size()) != np * np) {
      throw Error(ErrorCode::kFileFormatError, "cov must have N*N entries");
    }
    r.p_hat = Eigen::Map<const Eigen::VectorXd>(p.data(), np);
    r.cov.resize(np, np);
    for (Eigen::Index i = 0; i < np; ++i) {
      for (Eigen::Index k = 0; k < np; ++k) r.cov(i, k) = cov[i * np + k];
    }
    r.n = j.at("n").get<int64_t>();
    r.method = MethodTagFromName(j.at("method_tag").get<std::string>());
    r.cov_kind = j.value("covariance", std::string("plug-in")) == "known-p"
                     ? CovarianceKind::kKnownP
                     : CovarianceKind::kPlugIn;
    r.possibly_indefinite = j.value("possibly_indefinite", false);
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFileFormatError,
                std::string("malformed estimate JSON: ") + e.what());
  }
}

json PrivacyToJson(const PrivacyReport& report) {
  json detail = json::array();
  for (const ResponseDetail& d : report.detail) {
    detail.push_back({{"response", d.label},
                      {"probability", NumberToJson(d.probability)},
                      {"designated_posterior", NumberToJson(d.designated_posterior)}});
  }
  json j = {{"h_t", NumberToJson(report.h_t)},
            {"i_tr", NumberToJson(report.i_tr)},
            {"h_t_given_r", NumberToJson(report.h_t_given_r)},
            {"h_r", NumberToJson(report.h_r)},
            {"detail", std::move(detail)}};
  j["worst_case_retained"] = report.worst_case_retained
                                 ? NumberToJson(*report.worst_case_retained)
                                 : json(nullptr);
  j["designated_party"] = report.designated_party
                              ? json(*report.designated_party + 1)
                              : json(nullptr);
  return j;
}

PrivacyReport PrivacyFromJson(const json& j) {
  try {
    PrivacyReport r;
    r.h_t = NumberFromJson(j.at("h_t"));
    r.i_tr = NumberFromJson(j.at("i_tr"));
    r.h_t_given_r = NumberFromJson(j.at("h_t_given_r"));
    r.h_r = NumberFromJson(j.at("h_r"));
    if (!j.at("worst_case_retained").is_null()) {
      r.worst_case_retained = NumberFromJson(j["worst_case_retained"]);
    }
    if (!j.at("designated_party").is_null()) {
      r.designated_party = j["designated_party"].get<int>() - 1;
    }
    for (const json& d : j.at("detail")) {
      r.detail.push_back({d.at("response").get<std::string>(),
                          NumberFromJson(d.at("probability")),
                          NumberFromJson(d.at("designated_posterior"))});
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFileFormatError,
                std::string("malformed privacy JSON: ") + e.what());
  }
}

json JeopardyToJson(const JeopardyReport& report) {
  json sensitive = json::array();
  for (int s : report.sensitive) sensitive.push_back(s + 1);
  json infinite = json::array();
  for (int r : report.infinite_responses) infinite.push_back(r + 1);
  return {{"sensitive", std::move(sensitive)},
          {"responses", report.response_labels},
          {"jeopardy", NumberArray(report.per_response)},
          {"max_j", NumberToJson(report.max_j)},
          {"mean_j", NumberToJson(report.mean_j)},
          {"kl_j", NumberToJson(report.kl_j)},
          {"infinite_responses", std::move(infinite)}};
}

JeopardyReport JeopardyFromJson(const json& j) {
  try {
    JeopardyReport r;
    for (const json& s : j.at("sensitive")) r.sensitive.push_back(s.get<int>() - 1);
    r.response_labels = j.at("responses").get<std::vector<std::string>>();
    r.per_response = NumberArrayFromJson(j.at("jeopardy"));
    r.max_j = NumberFromJson(j.at("max_j"));
    r.mean_j = NumberFromJson(j.at("mean_j"));
    r.kl_j = NumberFromJson(j.at("kl_j"));
    for (const json& k : j.at("infinite_responses")) {
      r.infinite_responses.push_back(k.get<int>() - 1);
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFileFormatError,
                std::string("malformed jeopardy JSON: ") + e.what());
  }
}

json MonteCarloToJson(const MonteCarloSummary& s) {
  auto matrix = [](const Eigen::MatrixXd& m) {
    std::vector<double> v;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index k = 0; k < m.cols(); ++k) v.push_back(m(i, k));
    }
    return NumberArray(v);
  };
  json j = {{"replications", s.replications},
            {"mean", NumberArray(ToStdVector(s.mean))},
            {"mean_se", NumberArray(ToStdVector(s.mean_se))},
            {"analytic_cov", matrix(s.analytic_cov)},
            {"max_mean_deviation_se", NumberToJson(s.max_mean_deviation_se)},
            {"covariance_defined", s.cov.has_value()}};
  if (s.cov) {
    j["cov"] = matrix(*s.cov);
    j["cov_se"] = matrix(*s.cov_se);
    j["max_cov_deviation_se"] = NumberToJson(*s.max_cov_deviation_se);
  }
  return j;
}

}  // namespace anonpoll
