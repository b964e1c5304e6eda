#include <doctest.h>

#include <cmath>
#include <vector>

#include "facet/errors.hpp"
#include "facet/expert.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace facet;

TEST_CASE("ranking validation") {
  SUBCASE("rank outside 1..5") {
    CHECK_THROWS_AS(ExpertRankingSet({{"e1", "process", "a", 6}}), ValidationError);
    CHECK_THROWS_AS(ExpertRankingSet({{"e1", "process", "a", 0}}), ValidationError);
  }
  SUBCASE("one expert cannot rank a factor twice") {
    CHECK_THROWS_AS(ExpertRankingSet({{"e1", "process", "a", 1}, {"e1", "personnel", "a", 2}}),
                    ValidationError);
  }
  SUBCASE("one expert cannot reuse a rank within a category") {
    CHECK_THROWS_AS(ExpertRankingSet({{"e1", "process", "a", 1}, {"e1", "process", "b", 1}}),
                    ValidationError);
  }
  SUBCASE("the same rank in different categories is fine") {
    CHECK_NOTHROW(ExpertRankingSet({{"e1", "process", "a", 1}, {"e1", "personnel", "b", 1}}));
  }
}

TEST_CASE("aggregate_expert_scores follows the (6-r)/5 rule") {
  SUBCASE("single expert, rank 1") {
    const ExpertRankingSet rankings({{"e1", "process", "a", 1}});
    CHECK(aggregate_expert_scores(rankings).at("a") == doctest::Approx(1.0));
  }
  SUBCASE("two experts, ranks 1 and 3") {
    const ExpertRankingSet rankings({{"e1", "process", "a", 1}, {"e2", "process", "a", 3}});
    CHECK(aggregate_expert_scores(rankings).at("a") == doctest::Approx(0.8));
  }
  SUBCASE("a factor unranked by every expert scores 0 for them") {
    const ExpertRankingSet rankings(
        {{"e1", "process", "a", 1}, {"e2", "process", "b", 1}, {"e3", "process", "b", 2}});
    // a: (1.0 + 0 + 0) / 3
    CHECK(aggregate_expert_scores(rankings).at("a") == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("load_rankings_csv reads the fixture") {
  const ExpertRankingSet rankings = load_rankings_csv(testutil::data_file("rankings.csv"));
  CHECK(rankings.experts().size() == 3);
  CHECK(rankings.factors().size() == 8);
  const auto scores = aggregate_expert_scores(rankings);
  // team_experience: ranks 1,1,2 -> (1.0 + 1.0 + 0.8)/3
  CHECK(scores.at("team_experience") == doctest::Approx(2.8 / 3.0));
  // kloc: ranks 3,1 and unranked by e3 -> (0.6 + 1.0 + 0)/3
  CHECK(scores.at("kloc") == doctest::Approx(1.6 / 3.0));
}

TEST_CASE("criterion scores load and average with a neutral default") {
  const CriterionScores scores = load_scores_csv(testutil::data_file("scores.csv"));
  const auto means = mean_criterion_scores(scores);
  CHECK(means.at("team_experience").impact == doctest::Approx(14.0 / 3.0));
  CHECK(means.at("team_experience").difficulty == doctest::Approx(7.0 / 3.0));
  CHECK(means.at("kloc").controllability == doctest::Approx(1.0));
  CHECK_THROWS_AS(CriterionScores({{"e1", "a", 6, 3, 3}}), ValidationError);
  CHECK_THROWS_AS(CriterionScores({{"e1", "a", 3, 3, 3}, {"e1", "a", 2, 2, 2}}),
                  ValidationError);
}

TEST_CASE("kendall w spans perfect agreement to perfect disagreement") {
  const std::vector<std::vector<double>> identical{{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  CHECK(kendall_w(identical).w == doctest::Approx(1.0));

  const std::vector<std::vector<double>> reversed{{1, 2, 3}, {3, 2, 1}};
  CHECK(kendall_w(reversed).w == doctest::Approx(0.0));
}

TEST_CASE("kendall w agrees with the reference on tied and untied data") {
  const std::vector<std::vector<double>> plain{{1, 3, 2, 4}, {2, 3, 1, 4}, {1, 4, 2, 3}};
  CHECK(kendall_w(plain).w == doctest::Approx(oracle::kendall_w(plain)).epsilon(1e-12));

  const std::vector<std::vector<double>> tied{{1, 2, 2, 4}, {1.5, 1.5, 3, 4}, {1, 2, 3, 4}};
  CHECK(kendall_w(tied).w == doctest::Approx(oracle::kendall_w(tied)).epsilon(1e-12));

  // Scores, not ranks: the implementation re-ranks rows first.
  const std::vector<std::vector<double>> scores{{0.9, 0.1, 0.5, 0.3}, {10, 2, 7, 7}};
  CHECK(kendall_w(scores).w ==
        doctest::Approx(oracle::kendall_w(scores)).epsilon(1e-12));
}

TEST_CASE("kendall w p-value uses the chi-squared approximation") {
  const std::vector<std::vector<double>> rankings{{1, 3, 2, 5, 4}, {2, 3, 1, 5, 4},
                                                  {1, 2, 3, 4, 5}};
  const ConcordanceResult r = kendall_w(rankings);
  CHECK(r.df == 4);
  const double chi = 3.0 * 4.0 * r.w;
  CHECK(r.chi_squared == doctest::Approx(chi).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(oracle::chi_squared_p_value(chi, 4.0)).epsilon(1e-9));
}

TEST_CASE("kendall w rejects degenerate input") {
  CHECK_THROWS_AS((void)kendall_w(std::vector<std::vector<double>>{}), ValidationError);
  const std::vector<std::vector<double>> tied_flat{{1, 1, 1}, {2, 2, 2}};
  CHECK_THROWS_AS((void)kendall_w(tied_flat), ValidationError);
  const std::vector<std::vector<double>> ragged{{1, 2, 3}, {1, 2}};
  CHECK_THROWS_AS((void)kendall_w(ragged), ValidationError);
}

TEST_CASE("spearman rho matches hand values") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{1, 2, 3, 4, 5};
  CHECK(spearman_rho(a, b) == doctest::Approx(1.0));
  const std::vector<double> c{5, 4, 3, 2, 1};
  CHECK(spearman_rho(a, c) == doctest::Approx(-1.0));
  const std::vector<double> d{2, 1, 4, 3, 5};
  CHECK(spearman_rho(a, d) == doctest::Approx(0.8));
}
