#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace facet {

// One ranked factor inside an expert's per-category top-5 list; rank 1 is the
// most relevant.
struct RankingEntry {
  std::string expert;
  std::string category;
  std::string factor;
  int rank = 0;
};

class ExpertRankingSet {
 public:
  explicit ExpertRankingSet(std::vector<RankingEntry> entries);

  const std::vector<RankingEntry>& entries() const { return entries_; }
  const std::vector<std::string>& experts() const { return experts_; }
  const std::vector<std::string>& factors() const { return factors_; }
  const std::vector<std::string>& categories() const { return categories_; }

 private:
  std::vector<RankingEntry> entries_;
  std::vector<std::string> experts_;
  std::vector<std::string> factors_;
  std::vector<std::string> categories_;
};

struct ScoreEntry {
  std::string expert;
  std::string factor;
  int impact = 3;
  int difficulty = 3;
  int controllability = 3;
};

class CriterionScores {
 public:
  explicit CriterionScores(std::vector<ScoreEntry> entries);

  const std::vector<ScoreEntry>& entries() const { return entries_; }
  const std::vector<std::string>& factors() const { return factors_; }

 private:
  std::vector<ScoreEntry> entries_;
  std::vector<std::string> factors_;
};

ExpertRankingSet load_rankings_csv(const std::filesystem::path& path);
CriterionScores load_scores_csv(const std::filesystem::path& path);

// Per expert a rank r becomes (6-r)/5 and an unranked factor 0; the factor
// score is the mean over all experts. Keys are every factor any expert named.
std::map<std::string, double> aggregate_expert_scores(const ExpertRankingSet& rankings);

struct MeanCriteria {
  double impact = 3.0;
  double difficulty = 3.0;
  double controllability = 3.0;
};

std::map<std::string, MeanCriteria> mean_criterion_scores(const CriterionScores& scores);

struct ConcordanceResult {
  double w = 0.0;
  double chi_squared = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

// Kendall's coefficient of concordance over an m x n rank matrix. Rows are
// re-ranked to midranks over 1..n first, so rankings drawn from a superset of
// objects are admissible; the tie-corrected denominator is used and the
// p-value comes from the chi-squared approximation with n-1 degrees of freedom.
ConcordanceResult kendall_w(std::span<const std::vector<double>> rankings);

// Spearman rank correlation of two score lists (midranks for ties).
double spearman_rho(std::span<const double> a, std::span<const double> b);

}  // namespace facet
