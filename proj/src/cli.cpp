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

#include "anonpoll/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "anonpoll/design.hpp"
#include "anonpoll/error.hpp"
#include "anonpoll/estimate.hpp"
#include "anonpoll/io.hpp"
#include "anonpoll/power.hpp"
#include "anonpoll/privacy.hpp"
#include "anonpoll/simulate.hpp"

namespace anonpoll {
namespace {

using nlohmann::json;

struct Options {
  std::string scenario = "uniform10";
  std::string design = "balanced";
  int n_parties = 0;  // 0: from the scenario
  std::string counts;
  std::string method;
  std::string sensitive = "1";
  std::string party = "1";
  std::string metric = "all";
  std::string format;
  std::string alloc = "optimal";
  std::string out;
  int64_t n = 15000;
  int64_t replications = 1;
  double gamma = 0.05;
  double level = 0.95;
  double bmax = 0.05;
  double bstep = 0.001;
  int64_t nmin = 1000;
  int64_t nmax = 20000;
  int64_t nstep = 500;
  std::optional<uint64_t> seed;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kUsageError, "cannot open '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Resolves a 1-based index or a party label.
int ResolveParty(const Preferences& p, const std::string& token) {
  const int by_label = p.IndexOf(token);
  if (by_label >= 0) return by_label;
  int index = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
  if (ec != std::errc() || ptr != token.data() + token.size() || index < 1 ||
      index > p.size()) {
    throw Error(ErrorCode::kUsageError, "unknown party '" + token + "'");
  }
  return index - 1;
}

Preferences ScenarioPreferences(const Options& o) {
  Preferences p = BuiltinScenario(o.scenario).preferences;
  if (o.n_parties > 0 && o.n_parties != p.size()) {
    return Preferences::Uniform(o.n_parties);
  }
  return p;
}

DesignSpec ResolveDesign(const Options& o, const Preferences& p) {
  if (o.design == "pair") {
    BuildPairDesign(p.size());
    return {p.size(), std::nullopt, p.labels()};
  }
  if (o.design == "balanced") {
    return {p.size(), BuildBalancedListDesign(p.size()), p.labels()};
  }
  json j;
  try {
    j = json::parse(ReadFile(o.design));
  } catch (const json::parse_error& e) {
    throw FileFormatError(std::string("invalid design JSON: ") + e.what(), 1,
                          static_cast<int>(e.byte));
  }
  DesignSpec spec;
  try {
    spec = DesignSpecFromJson(j);
  } catch (const json::exception& e) {
    throw FileFormatError(std::string("invalid design JSON: ") + e.what(), 1, 1);
  }
  if (spec.labels.empty()) {
    spec.labels = spec.n_parties == p.size()
                      ? p.labels()
                      : Preferences::Uniform(spec.n_parties).labels();
  }
  return spec;
}

uint64_t ResolveSeed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("ANONPOLL_SEED")) {
    uint64_t seed = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::kUsageError, "ANONPOLL_SEED is not an integer");
    }
    return seed;
  }
  return 1;
}

// Display rounding is half away from zero.
std::string Paper2(double x) {
  return fmt::format("{:.2f}", std::round(x * 100.0) / 100.0);
}
std::string Paper3(double x) {
  if (!std::isfinite(x)) return fmt::format("{}", x);
  if (x == 0.0) return "0.00";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const double scale = std::pow(10.0, 2 - exponent);
  return fmt::format("{:#.3g}", std::round(x * scale) / scale);
}

// Rows of a tables/privacy report: (table, quantity, method, value, human).
struct Row {
  std::string table;
  std::string quantity;
  std::string method;
  double value;
  std::string human;
};

void EmitRows(const std::vector<Row>& rows, const std::string& format,
              std::ostream& out) {
  if (format == "csv") {
    out << "table,quantity,method,value\n";
    for (const Row& r : rows) {
      out << r.table << ',' << r.quantity << ',' << r.method << ','
          << FormatNumber(r.value) << '\n';
    }
    return;
  }
  for (const Row& r : rows) {
    out << fmt::format("{:<10} {:<28} {:<8} {:>10}\n", r.table, r.quantity,
                       r.method, r.human);
  }
}

std::vector<Row> EntropyRows(const Preferences& p, int s,
                             const std::string& methods) {
  std::vector<Row> rows;
  const std::string label = p.labels()[s];
  rows.push_back({"entropy", "H[T]", "", Entropy(p), Paper2(Entropy(p))});
  if (methods != "list") {
    const PrivacyReport r = PairPrivacy(p, s);
    rows.push_back({"entropy", "I[T;R]", "pair", r.i_tr, Paper2(r.i_tr)});
    rows.push_back({"entropy", "H[T|R]", "pair", r.h_t_given_r, Paper2(r.h_t_given_r)});
    rows.push_back({"entropy", "worst_retained(" + label + ")", "pair",
                    *r.worst_case_retained, Paper2(*r.worst_case_retained)});
  }
  if (methods != "pair") {
    const PrivacyReport r = ListPrivacy(p, BuildBalancedListDesign(p.size()), s);
    rows.push_back({"entropy", "I[T;R]", "list", r.i_tr, Paper2(r.i_tr)});
    rows.push_back({"entropy", "H[T|R]", "list", r.h_t_given_r, Paper2(r.h_t_given_r)});
    rows.push_back({"entropy", "worst_retained(" + label + ")", "list",
                    *r.worst_case_retained, Paper2(*r.worst_case_retained)});
  }
  return rows;
}

std::vector<Row> JeopardyRows(const Preferences& p, int s,
                              const std::string& methods) {
  std::vector<Row> rows;
  const std::string label = "(" + p.labels()[s] + ")";
  if (methods != "list") {
    const JeopardyReport r = PairJeopardy(p, s);
    rows.push_back({"jeopardy", "max_J" + label, "pair", r.max_j, Paper3(r.max_j)});
    rows.push_back({"jeopardy", "mean_J" + label, "pair", r.mean_j, Paper3(r.mean_j)});
    rows.push_back({"jeopardy", "kl_J" + label, "pair", r.kl_j, Paper3(r.kl_j)});
  }
  if (methods != "pair") {
    const JeopardyReport r = ListJeopardy(p, BuildBalancedListDesign(p.size()), s);
    rows.push_back({"jeopardy", "max_J" + label, "list", r.max_j, Paper3(r.max_j)});
    rows.push_back({"jeopardy", "mean_J" + label, "list", r.mean_j, Paper3(r.mean_j)});
    rows.push_back({"jeopardy", "kl_J" + label, "list", r.kl_j, Paper3(r.kl_j)});
  }
  return rows;
}

// Per-respondent (n = 1) variance of party s and covariance of s with the
// next party.
std::vector<Row> VarianceRows(const Preferences& p, int s) {
  const int t = (s + 1) % p.size();
  const std::string var = "Var(" + p.labels()[s] + ")";
  const std::string cov = "Cov(" + p.labels()[s] + ";" + p.labels()[t] + ")";
  const Eigen::MatrixXd pair = PairCovariance(p, 1.0);
  const Eigen::MatrixXd list = ListCovariance(BuildBalancedListDesign(p.size()), p, 1.0);
  const Eigen::MatrixXd base = BinomialCovariance(p, 1.0);
  auto h = [](double x) { return fmt::format("{:.4g}", x); };
  return {{"variance", var, "pair", pair(s, s), h(pair(s, s))},
          {"variance", cov, "pair", pair(s, t), h(pair(s, t))},
          {"variance", var, "list", list(s, s), h(list(s, s))},
          {"variance", cov, "list", list(s, t), h(list(s, t))},
          {"variance", var, "baseline", base(s, s), h(base(s, s))},
          {"variance", cov, "baseline", base(s, t), h(base(s, t))}};
}

std::vector<Row> AllocationRows(const Preferences& p, int s, int64_t n) {
  const double vb = BinomialVariance(p[s]);
  const Allocation pair =
      OptimalAllocation(n, PerSampleVariance(PollMethod::Pair(), p, s), vb);
  const Allocation list = OptimalAllocation(
      n, PerSampleVariance(PollMethod::List(BuildBalancedListDesign(p.size())), p, s),
      vb);
  const std::string q = "n_method(" + p.labels()[s] + ")";
  return {{"allocation", q, "pair", static_cast<double>(pair.n_method),
           std::to_string(pair.n_method)},
          {"allocation", q, "list", static_cast<double>(list.n_method),
           std::to_string(list.n_method)}};
}

void RunTables(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const int s = ResolveParty(p, o.sensitive);
  std::vector<Row> rows;
  auto want = [&](const char* m) { return o.metric == "all" || o.metric == m; };
  if (!want("entropy") && !want("jeopardy") && !want("variance") &&
      !want("allocation")) {
    throw Error(ErrorCode::kUsageError, "unknown metric '" + o.metric + "'");
  }
  if (want("entropy")) {
    auto r = EntropyRows(p, s, "both");
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (want("jeopardy")) {
    auto r = JeopardyRows(p, s, "both");
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (want("variance")) {
    auto r = VarianceRows(p, s);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  if (want("allocation")) {
    auto r = AllocationRows(p, s, o.n);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  EmitRows(rows, o.format.empty() ? "csv" : o.format, out);
}

void RunPrivacy(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const int s = ResolveParty(p, o.sensitive);
  const std::string methods = o.method.empty() ? "both" : o.method;
  if (methods != "both" && methods != "pair" && methods != "list") {
    throw Error(ErrorCode::kUsageError, "--method must be pair or list");
  }
  if (o.format == "json") {
    json j = json::object();
    if (methods != "list") {
      j["pair"] = {{"privacy", PrivacyToJson(PairPrivacy(p, s))},
                   {"jeopardy", JeopardyToJson(PairJeopardy(p, s))}};
    }
    if (methods != "pair") {
      const DesignSpec d = ResolveDesign(o.design == "pair" ? Options{} : o, p);
      const ListDesign& list = d.list ? *d.list : BuildBalancedListDesign(p.size());
      j["list"] = {{"privacy", PrivacyToJson(ListPrivacy(p, list, s))},
                   {"jeopardy", JeopardyToJson(ListJeopardy(p, list, s))}};
    }
    out << j.dump(2) << '\n';
    return;
  }
  std::vector<Row> rows = EntropyRows(p, s, methods);
  const auto jr = JeopardyRows(p, s, methods);
  rows.insert(rows.end(), jr.begin(), jr.end());
  EmitRows(rows, o.format.empty() ? "table" : o.format, out);
}

void RunDesign(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const DesignSpec d = ResolveDesign(o, p);
  json j;
  Eigen::MatrixXd stacked;
  int rank = 0;
  std::vector<std::string> responses;
  if (d.is_pair()) {
    const PairDesign pair = BuildPairDesign(d.n_parties);
    j["design"] = PairDesignToJson(d.n_parties, d.labels);
    const StackedMatrix s = Stack(pair.survey());
    stacked = s.matrix;
    rank = s.rank;
    responses = ResponseLabels(
        pair, Preferences(d.labels, Preferences::Uniform(d.n_parties).p()));
  } else {
    j["design"] = ListDesignToJson(*d.list, d.labels);
    const StackedMatrix s = Stack(d.list->survey());
    stacked = s.matrix;
    rank = s.rank;
    responses = ResponseLabels(*d.list);
  }
  json rows = json::array();
  for (Eigen::Index r = 0; r < stacked.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < stacked.cols(); ++c) row.push_back(stacked(r, c));
    rows.push_back(std::move(row));
  }
  j["stacked"] = std::move(rows);
  j["rank"] = rank;
  j["response_labels"] = responses;
  out << j.dump(2) << '\n';
}

void RunEstimate(const Options& o, std::ostream& out) {
  if (o.counts.empty()) throw Error(ErrorCode::kUsageError, "--counts is required");
  const Preferences p = ScenarioPreferences(o);
  const DesignSpec d = ResolveDesign(o, p);
  const ResponseCounts raw = CountsFromCsv(ReadFile(o.counts));
  EstimateResult result;
  if (d.is_pair()) {
    const PairDesign pair = BuildPairDesign(d.n_parties);
    result = EstimateGeneral(pair.survey(), AlignCounts(pair.survey(), raw));
  } else {
    result = EstimateGeneral(d.list->survey(), AlignCounts(d.list->survey(), raw));
  }
  json j = EstimateToJson(result, d.labels);
  json intervals = json::array();
  for (const Interval& iv : ConfidenceIntervals(result, o.level)) {
    intervals.push_back({{"lower", iv.lower},
                         {"upper", iv.upper},
                         {"outside_unit", iv.outside_unit}});
  }
  j["level"] = o.level;
  j["intervals"] = std::move(intervals);
  out << j.dump(2) << '\n';
}

void RunSimulate(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const DesignSpec d = ResolveDesign(o, p);
  if (d.n_parties != p.size()) {
    throw Error(ErrorCode::kUsageError,
                "design and scenario disagree on the number of parties");
  }
  const uint64_t seed = ResolveSeed(o);
  std::optional<PairDesign> pair;
  if (d.is_pair()) pair = BuildPairDesign(d.n_parties);
  const SurveyDesign& survey = pair ? pair->survey() : d.list->survey();
  const std::vector<int64_t> alloc =
      pair ? std::vector<int64_t>{o.n} : EqualAllocation(o.n, survey.num_blocks());

  if (o.replications <= 1) {
    CounterRng rng(seed);
    const ResponseCounts c = pair ? SimulatePair(p, o.n, rng)
                                  : SimulateList(*d.list, p, alloc, rng);
    out << CountsToCsv(c);
    return;
  }
  const SimulationConfig config{p, survey, alloc, o.replications, seed, 0};
  out << MonteCarloToJson(MonteCarloStudy(config)).dump(2) << '\n';
}

std::pair<Allocation, Allocation> PowerAllocations(const Options& o,
                                                   const Preferences& p, int s,
                                                   const PollMethod& list) {
  if (o.alloc == "optimal") {
    const double vb = BinomialVariance(p[s]);
    return {OptimalAllocation(o.n, PerSampleVariance(PollMethod::Pair(), p, s), vb),
            OptimalAllocation(o.n, PerSampleVariance(list, p, s), vb)};
  }
  int64_t n_method = 0;
  auto [ptr, ec] =
      std::from_chars(o.alloc.data(), o.alloc.data() + o.alloc.size(), n_method);
  if (ec != std::errc() || ptr != o.alloc.data() + o.alloc.size() ||
      n_method <= 0 || n_method >= o.n) {
    throw Error(ErrorCode::kUsageError,
                "--alloc must be 'optimal' or an integer in (0, n)");
  }
  const Allocation a{n_method, o.n - n_method};
  return {a, a};
}

void RunPower(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const int s = ResolveParty(p, o.party);
  if (!(o.bstep > 0.0)) throw Error(ErrorCode::kUsageError, "--bstep must be positive");
  const PollMethod list = PollMethod::List(BuildBalancedListDesign(p.size()));
  const auto [pair_alloc, list_alloc] = PowerAllocations(o, p, s, list);

  std::vector<double> grid;
  const double bmax = std::min(o.bmax, p[s]);
  for (int64_t k = 0;; ++k) {
    const double b = static_cast<double>(k) * o.bstep;
    if (b > bmax + 1e-12) break;
    grid.push_back(std::min(b, p[s]));
  }
  const PowerResult pair = PowerCurve(
      {p, s, grid, pair_alloc.n_method, pair_alloc.n_binomial, o.gamma, PollMethod::Pair()});
  const PowerResult lst = PowerCurve(
      {p, s, grid, list_alloc.n_method, list_alloc.n_binomial, o.gamma, list});
  out << "b,power_pair,power_list\n";
  for (size_t k = 0; k < grid.size(); ++k) {
    out << FormatNumber(grid[k]) << ',' << FormatNumber(pair.power[k]) << ','
        << FormatNumber(lst.power[k]) << '\n';
  }
}

void RunSdCurve(const Options& o, std::ostream& out) {
  const Preferences p = ScenarioPreferences(o);
  const int s = ResolveParty(p, o.party);
  const std::string m = o.method.empty() ? "list" : o.method;
  PollMethod method;
  if (m == "list") {
    method = PollMethod::List(BuildBalancedListDesign(p.size()));
  } else if (m == "pair") {
    method = PollMethod::Pair();
  } else {
    throw Error(ErrorCode::kUsageError, "--method must be pair or list");
  }
  if (o.nmin < 1 || o.nmax < o.nmin || o.nstep < 1) {
    throw Error(ErrorCode::kUsageError, "bad n grid");
  }
  std::vector<int64_t> grid;
  for (int64_t n = o.nmin; n <= o.nmax; n += o.nstep) grid.push_back(n);
  out << "n,sd_method,sd_pair,sd_binomial\n";
  for (const SdPoint& pt : SdCurve(method, p, s, grid)) {
    out << pt.n << ',' << FormatNumber(pt.sd_method) << ','
        << FormatNumber(pt.sd_pair) << ',' << FormatNumber(pt.sd_binomial) << '\n';
  }
}

void ReportError(std::ostream& err, const Error& e) {
  json j = {{"error", ErrorCodeName(e.code())}, {"message", e.what()}};
  if (const auto* f = dynamic_cast<const FileFormatError*>(&e)) {
    j["line"] = f->line();
    j["column"] = f->column();
  }
  if (const auto* r = dynamic_cast<const RankDeficientError*>(&e)) {
    j["rank"] = r->rank();
  }
  err << j.dump() << '\n';
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Anonymised multiple-choice polling: designs, estimators, "
               "privacy and power"};
  app.require_subcommand(1);
  Options o;
  uint64_t seed = 0;

  auto scenario = [&](CLI::App* sub) {
    sub->add_option("--scenario", o.scenario, "uniform10 or sweden2014")
        ->capture_default_str();
    sub->add_option("--n-parties", o.n_parties,
                    "use uniform preferences over this many parties");
    sub->add_option("--out", o.out, "write output to this file");
  };

  CLI::App* design = app.add_subcommand("design", "show a design and its stacked matrix");
  scenario(design);
  design->add_option("--design", o.design, "pair, balanced or a JSON file");

  CLI::App* estimate = app.add_subcommand("estimate", "estimate preferences from counts");
  scenario(estimate);
  estimate->add_option("--design", o.design, "pair, balanced or a JSON file");
  estimate->add_option("--counts", o.counts, "ResponseCounts CSV")->required();
  estimate->add_option("--level", o.level, "confidence level");

  CLI::App* privacy = app.add_subcommand("privacy", "entropy and jeopardy measures");
  scenario(privacy);
  privacy->add_option("--method", o.method, "pair or list (default both)");
  privacy->add_option("--design", o.design, "list design: balanced or a JSON file");
  privacy->add_option("--sensitive", o.sensitive, "sensitive party (index or label)");
  privacy->add_option("--format", o.format, "table, csv or json");

  CLI::App* power = app.add_subcommand("power", "bias-detection power curves (CSV)");
  scenario(power);
  power->add_option("--party", o.party, "party index or label");
  power->add_option("--n", o.n, "total respondents over both surveys");
  power->add_option("--alloc", o.alloc, "'optimal' or respondents in the anonymised survey");
  power->add_option("--gamma", o.gamma, "type I error level");
  power->add_option("--bmax", o.bmax, "largest bias on the grid");
  power->add_option("--bstep", o.bstep, "bias grid step");

  CLI::App* sdcurve = app.add_subcommand("sdcurve", "standard deviation vs sample size (CSV)");
  scenario(sdcurve);
  sdcurve->add_option("--party", o.party, "party index or label");
  sdcurve->add_option("--method", o.method, "list (default) or pair");
  sdcurve->add_option("--nmin", o.nmin);
  sdcurve->add_option("--nmax", o.nmax);
  sdcurve->add_option("--nstep", o.nstep);

  CLI::App* simulate = app.add_subcommand("simulate", "simulate survey responses");
  scenario(simulate);
  simulate->add_option("--design", o.design, "pair, balanced or a JSON file");
  simulate->add_option("--n", o.n, "respondents");
  auto* seed_opt = simulate->add_option("--seed", seed, "RNG seed (else $ANONPOLL_SEED)");
  simulate->add_option("--replications", o.replications,
                       "> 1 runs a Monte Carlo study and writes JSON");

  CLI::App* tables = app.add_subcommand("tables", "reproduce the summary tables (CSV)");
  scenario(tables);
  tables->add_option("--metric", o.metric, "entropy, jeopardy, variance, allocation or all");
  tables->add_option("--sensitive", o.sensitive, "sensitive party (index or label)");
  tables->add_option("--n", o.n, "total sample size for allocations");
  tables->add_option("--format", o.format, "csv (default) or table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    ReportError(err, Error(ErrorCode::kUsageError, e.what()));
    return 2;
  }
  if (seed_opt->count() > 0) o.seed = seed;

  try {
    std::ostringstream buffer;
    if (design->parsed()) RunDesign(o, buffer);
    if (estimate->parsed()) RunEstimate(o, buffer);
    if (privacy->parsed()) RunPrivacy(o, buffer);
    if (power->parsed()) RunPower(o, buffer);
    if (sdcurve->parsed()) RunSdCurve(o, buffer);
    if (simulate->parsed()) RunSimulate(o, buffer);
    if (tables->parsed()) RunTables(o, buffer);
    if (o.out.empty()) {
      out << buffer.str();
    } else {
      std::ofstream file(o.out, std::ios::binary);
      if (!file) throw Error(ErrorCode::kUsageError, "cannot write '" + o.out + "'");
      file << buffer.str();
    }
  } catch (const Error& e) {
    ReportError(err, e);
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace anonpoll
