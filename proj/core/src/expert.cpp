#include "facet/expert.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "csv.hpp"
#include "facet/errors.hpp"
#include "facet/stats.hpp"

namespace facet {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

int parse_likert(const std::string& raw, std::string_view column, std::size_t line) {
  int value = 0;
  try {
    std::size_t pos = 0;
    value = std::stoi(raw, &pos);
    if (pos != raw.size()) throw std::invalid_argument(raw);
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("line {}: {} '{}' is not an integer", line, column, raw));
  }
  if (value < 1 || value > 5)
    throw ValidationError(fmt::format("line {}: {} {} outside the 1..5 scale", line, column, value));
  return value;
}

void expect_header(const csv::Table& table, std::initializer_list<const char*> expected,
                   const std::filesystem::path& path) {
  if (table.header.size() != expected.size() ||
      !std::equal(table.header.begin(), table.header.end(), expected.begin()))
    throw ValidationError(fmt::format("{}: expected header {}", path.filename().string(),
                                      fmt::join(expected, ",")));
}

}  // namespace

ExpertRankingSet::ExpertRankingSet(std::vector<RankingEntry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("expert ranking set is empty");
  std::set<std::pair<std::string, std::string>> factor_seen;
  std::map<std::pair<std::string, std::string>, std::set<int>> ranks_seen;
  std::vector<std::string> experts, factors, categories;
  for (const RankingEntry& e : entries_) {
    if (e.expert.empty() || e.category.empty() || e.factor.empty())
      throw ValidationError("ranking entry with an empty field");
    if (e.rank < 1 || e.rank > 5)
      throw ValidationError(fmt::format("expert '{}': rank {} for '{}' outside 1..5", e.expert,
                                        e.rank, e.factor));
    if (!factor_seen.emplace(e.expert, e.factor).second)
      throw ValidationError(
          fmt::format("expert '{}' ranks factor '{}' more than once", e.expert, e.factor));
    auto key = std::make_pair(e.expert, e.category);
    if (!ranks_seen[key].insert(e.rank).second)
      throw ValidationError(fmt::format("expert '{}', category '{}': duplicate rank {}", e.expert,
                                        e.category, e.rank));
    experts.push_back(e.expert);
    factors.push_back(e.factor);
    categories.push_back(e.category);
  }
  experts_ = sorted_unique(std::move(experts));
  factors_ = sorted_unique(std::move(factors));
  categories_ = sorted_unique(std::move(categories));
}

CriterionScores::CriterionScores(std::vector<ScoreEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ValidationError("criterion score set is empty");
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> factors;
  for (const ScoreEntry& e : entries_) {
    if (e.expert.empty() || e.factor.empty())
      throw ValidationError("score entry with an empty field");
    for (int v : {e.impact, e.difficulty, e.controllability})
      if (v < 1 || v > 5)
        throw ValidationError(fmt::format("expert '{}', factor '{}': score {} outside 1..5",
                                          e.expert, e.factor, v));
    if (!seen.emplace(e.expert, e.factor).second)
      throw ValidationError(
          fmt::format("expert '{}' scores factor '{}' more than once", e.expert, e.factor));
    factors.push_back(e.factor);
  }
  factors_ = sorted_unique(std::move(factors));
}

ExpertRankingSet load_rankings_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read_file(path);
  expect_header(table, {"expert_id", "category", "factor", "rank"}, path);
  std::vector<RankingEntry> entries;
  entries.reserve(table.rows.size());
  for (const csv::Row& row : table.rows) {
    if (row.fields.size() != 4)
      throw ParseError(fmt::format("{}:{}: expected 4 fields", path.filename().string(), row.line));
    entries.push_back({row.fields[0], row.fields[1], row.fields[2],
                       parse_likert(row.fields[3], "rank", row.line)});
  }
  return ExpertRankingSet(std::move(entries));
}

CriterionScores load_scores_csv(const std::filesystem::path& path) {
  csv::Table table = csv::read_file(path);
  expect_header(table, {"expert_id", "factor", "impact", "difficulty", "controllability"}, path);
  std::vector<ScoreEntry> entries;
  entries.reserve(table.rows.size());
  for (const csv::Row& row : table.rows) {
    if (row.fields.size() != 5)
      throw ParseError(fmt::format("{}:{}: expected 5 fields", path.filename().string(), row.line));
    entries.push_back({row.fields[0], row.fields[1], parse_likert(row.fields[2], "impact", row.line),
                       parse_likert(row.fields[3], "difficulty", row.line),
                       parse_likert(row.fields[4], "controllability", row.line)});
  }
  return CriterionScores(std::move(entries));
}

std::map<std::string, double> aggregate_expert_scores(const ExpertRankingSet& rankings) {
  const auto experts = static_cast<double>(rankings.experts().size());
  std::map<std::string, double> totals;
  for (const std::string& factor : rankings.factors()) totals[factor] = 0.0;
  for (const RankingEntry& e : rankings.entries())
    totals[e.factor] += static_cast<double>(6 - e.rank) / 5.0;
  for (auto& [factor, total] : totals) total /= experts;
  return totals;
}

std::map<std::string, MeanCriteria> mean_criterion_scores(const CriterionScores& scores) {
  std::map<std::string, std::array<double, 4>> sums;  // impact, difficulty, controllability, count
  for (const ScoreEntry& e : scores.entries()) {
    auto& s = sums[e.factor];
    s[0] += e.impact;
    s[1] += e.difficulty;
    s[2] += e.controllability;
    s[3] += 1.0;
  }
  std::map<std::string, MeanCriteria> means;
  for (const auto& [factor, s] : sums)
    means[factor] = MeanCriteria{s[0] / s[3], s[1] / s[3], s[2] / s[3]};
  return means;
}

ConcordanceResult kendall_w(std::span<const std::vector<double>> rankings) {
  const std::size_t m = rankings.size();
  if (m < 2) throw ValidationError("concordance needs at least 2 rankings");
  const std::size_t n = rankings.front().size();
  if (n < 3) throw ValidationError("concordance needs at least 3 objects");
  for (const auto& row : rankings)
    if (row.size() != n)
      throw ValidationError(fmt::format("ranking length {} differs from {}", row.size(), n));

  // Re-rank every judge over exactly these n objects, midranks for ties.
  std::vector<std::vector<double>> ranks;
  ranks.reserve(m);
  double tie_correction = 0.0;
  for (const auto& row : rankings) {
    ranks.push_back(stats::midranks(row));
    std::map<double, std::size_t> groups;
    for (double r : ranks.back()) ++groups[r];
    for (const auto& [rank, t] : groups)
      tie_correction += static_cast<double>(t * t * t - t);
  }

  std::vector<double> totals(n, 0.0);
  for (const auto& row : ranks)
    for (std::size_t j = 0; j < n; ++j) totals[j] += row[j];
  const double mean_total = std::accumulate(totals.begin(), totals.end(), 0.0) /
                            static_cast<double>(n);
  double s = 0.0;
  for (double t : totals) s += (t - mean_total) * (t - mean_total);

  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double denom = md * md * (nd * nd * nd - nd) - md * tie_correction;
  if (denom <= 0.0)
    throw ValidationError("every ranking is fully tied; concordance is undefined");

  ConcordanceResult result;
  result.w = std::clamp(12.0 * s / denom, 0.0, 1.0);
  result.chi_squared = md * (nd - 1.0) * result.w;
  result.df = n - 1;
  result.p_value = stats::chi_squared_survival(result.chi_squared, static_cast<double>(result.df));
  return result;
}

double spearman_rho(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ValidationError(fmt::format("rank lists of different length: {} vs {}", a.size(),
                                      b.size()));
  if (a.size() < 2) throw ValidationError("rank correlation needs at least 2 objects");
  const std::vector<double> ra = stats::midranks(a);
  const std::vector<double> rb = stats::midranks(b);
  const double ma = stats::mean(ra);
  const double mb = stats::mean(rb);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0)
    throw ValidationError("rank correlation is undefined for a fully tied list");
  return cov / std::sqrt(va * vb);
}

}  // namespace facet
