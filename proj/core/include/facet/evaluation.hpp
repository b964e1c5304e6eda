#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "facet/dataset.hpp"
#include "facet/estimators.hpp"
#include "facet/factor_set.hpp"

namespace facet {

struct EstimateRecord {
  std::string id;
  double actual = 0.0;
  double predicted = 0.0;
  double mre = 0.0;
};

struct MetricsSummary {
  double mmre = 0.0;
  double mdmre = 0.0;
  double pred25 = 0.0;  // fraction with MRE <= 0.25
  std::size_t folds = 0;
};

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  bool significant = false;  // p < 0.02
  bool degenerate = false;   // zero within-group variance with unequal means
};

double mre(double actual, double predicted);
MetricsSummary summarize(std::span<const EstimateRecord> records);

// An estimator bound to its configuration; predicts the withheld dependent
// value of the query from the training dataset.
using Estimator = std::function<double(const Dataset& train, const EstimationQuery& q)>;

struct EstimatorSpec {
  std::string name;  // "knn" or "osr"
  std::size_t knn_k = 3;
  OsrConfig osr;
};

Estimator make_estimator(const EstimatorSpec& spec);

// Leave-one-out cross-validation: each record with a usable dependent value is
// estimated from all other records, restricted to the factor set. Records
// missing the dependent value are skipped (the count is reported separately by
// the callers). jobs > 1 runs folds concurrently with identical results.
std::vector<EstimateRecord> loocv(const Dataset& ds, const Estimator& estimator,
                                  const FactorSet& fs, std::size_t jobs = 1);

// One-way fixed-effects ANOVA of two MRE groups with the F = t^2 equivalence;
// significance is judged at alpha = 0.02.
AnovaResult anova_mre(std::span<const double> group_a, std::span<const double> group_b);

struct EvaluationRow {
  std::string estimator;
  std::string set_label;
  std::size_t set_size = 0;
  std::size_t factors_used = 0;  // measured factors actually driving the estimator
  MetricsSummary summary;
};

struct AnovaEntry {
  std::string estimator;
  std::string set_a;
  std::string set_b;
  AnovaResult result;
};

struct EvaluationReport {
  std::vector<EvaluationRow> rows;      // ordered by (estimator, set label)
  std::vector<AnovaEntry> anova;        // pairwise per estimator
  std::size_t excluded_records = 0;     // records without a usable dependent value
};

// Full cross product of loocv + summarize over estimators and factor sets,
// plus the pairwise ANOVA matrix per estimator. Factor sets are intersected
// with the dataset's independent factors before estimation.
EvaluationReport compare_factor_sets(const Dataset& ds, std::span<const EstimatorSpec> estimators,
                                     std::span<const FactorSet> sets, std::size_t jobs = 1);

void write_report_csv(const EvaluationReport& report, std::ostream& out);
void write_report_json(const EvaluationReport& report, std::ostream& out);
// Plain-text table with percentages at one decimal place.
void write_report_table(const EvaluationReport& report, std::ostream& out);

}  // namespace facet
