#pragma once

#include <string>
#include <utility>
#include <vector>

#include "facet/relief.hpp"

namespace facet {

// Named set of factor names, kept sorted and unique.
struct FactorSet {
  std::string label;
  std::vector<std::string> factors;

  bool contains(std::string_view factor) const;
  bool subset_of(const FactorSet& other) const;
};

FactorSet make_factor_set(std::string label, std::vector<std::string> factors);
FactorSet set_union(std::string label, const FactorSet& a, const FactorSet& b);
FactorSet set_intersection(std::string label, const FactorSet& a, const FactorSet& b);

// Factors with strictly positive weight, labeled FM_R.
FactorSet positive_weight_set(const WeightVector& wv);

// The ceil(p * N) highest-scored factors, ties broken by name.
FactorSet top_fraction(std::string label,
                       std::vector<std::pair<std::string, double>> scored, double p);

}  // namespace facet
