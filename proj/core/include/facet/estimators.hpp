#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "facet/dataset.hpp"
#include "facet/factor_set.hpp"

namespace facet {

// A project whose dependent value is withheld, estimated over the active
// factors only. Active factors must be non-missing in the query.
struct EstimationQuery {
  ProjectRecord record;
  FactorSet active;
};

// Mean dependent value of the k nearest records under the heterogeneous
// distance restricted to the active factors; ties at the cutoff break by
// record id.
double knn_estimate(const Dataset& ds, const EstimationQuery& q, std::size_t k);

struct OsrConfig {
  std::size_t bins = 4;        // quantile bins for numeric factors
  std::size_t classes = 3;     // equal-frequency dependent classes for dispersion
  std::size_t min_subset = 5;  // smallest admissible retained subset
};

struct OsrPredicate {
  std::string factor;
  std::string description;  // human-readable bin or level
};

struct OsrTrace {
  std::vector<OsrPredicate> predicates;
  std::vector<std::string> terminal_ids;
  std::vector<std::size_t> subset_sizes;  // after each predicate
  double prediction = 0.0;
};

// Optimized set reduction: starting from every training record, repeatedly
// apply the predicate (quantile bin for numeric factors, exact level
// otherwise) that holds for the query, keeps at least min_subset records and
// lowers the entropy of the equal-frequency dependent classes the most, each
// factor at most once and ties broken by factor name; the prediction is the
// median dependent value of the terminal subset.
std::pair<double, OsrTrace> osr_estimate(const Dataset& ds, const EstimationQuery& q,
                                         const OsrConfig& cfg);

void write_trace_json(const OsrTrace& trace, std::ostream& out);

}  // namespace facet
