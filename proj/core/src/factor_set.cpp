#include "facet/factor_set.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "facet/errors.hpp"

namespace facet {

bool FactorSet::contains(std::string_view factor) const {
  return std::binary_search(factors.begin(), factors.end(), factor);
}

bool FactorSet::subset_of(const FactorSet& other) const {
  return std::includes(other.factors.begin(), other.factors.end(), factors.begin(),
                       factors.end());
}

FactorSet make_factor_set(std::string label, std::vector<std::string> factors) {
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  return FactorSet{std::move(label), std::move(factors)};
}

FactorSet set_union(std::string label, const FactorSet& a, const FactorSet& b) {
  std::vector<std::string> merged;
  std::set_union(a.factors.begin(), a.factors.end(), b.factors.begin(), b.factors.end(),
                 std::back_inserter(merged));
  return FactorSet{std::move(label), std::move(merged)};
}

FactorSet set_intersection(std::string label, const FactorSet& a, const FactorSet& b) {
  std::vector<std::string> common;
  std::set_intersection(a.factors.begin(), a.factors.end(), b.factors.begin(), b.factors.end(),
                        std::back_inserter(common));
  return FactorSet{std::move(label), std::move(common)};
}

FactorSet positive_weight_set(const WeightVector& wv) {
  std::vector<std::string> names;
  for (const auto& [name, w] : wv.weights)
    if (w > 0.0) names.push_back(name);
  if (names.empty())
    throw ValidationError("no factor has a positive weight; nothing is relevant by this criterion");
  return make_factor_set("FM_R", std::move(names));
}

FactorSet top_fraction(std::string label, std::vector<std::pair<std::string, double>> scored,
                       double p) {
  if (p <= 0.0 || p > 1.0)
    throw ValidationError(fmt::format("top fraction {} outside (0,1]", p));
  if (scored.empty()) throw ValidationError(fmt::format("set '{}': nothing to rank", label));
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  const auto take = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(scored.size())));
  std::vector<std::string> names;
  names.reserve(take);
  for (std::size_t i = 0; i < take; ++i) names.push_back(scored[i].first);
  return make_factor_set(std::move(label), std::move(names));
}

}  // namespace facet
