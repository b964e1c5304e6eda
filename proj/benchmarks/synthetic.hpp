#pragma once

#include <random>
#include <string>
#include <vector>

#include <facet/dataset.hpp>

namespace bench {

// Mixed-scale dataset with two informative factors driving the dependent
// variable and the rest noise; optionally with a share of missing cells.
inline facet::Dataset make_dataset(std::size_t records, std::size_t factors,
                                   double missing_share, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<facet::FactorDescriptor> descriptors;
  descriptors.push_back({"id", facet::Scale::Nominal, facet::Role::Identifier, "", {}});
  for (std::size_t f = 0; f < factors; ++f)
    descriptors.push_back({"f" + std::to_string(f + 1), facet::Scale::Continuous,
                           facet::Role::Independent, "", {}});
  descriptors.push_back(
      {"productivity", facet::Scale::Continuous, facet::Role::Dependent, "", {}});

  std::vector<facet::ProjectRecord> rows;
  rows.reserve(records);
  for (std::size_t i = 0; i < records; ++i) {
    facet::ProjectRecord r;
    r.id = "p" + std::to_string(i + 1);
    r.values.resize(descriptors.size());
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t f = 0; f < factors; ++f) {
      const double v = unit(rng);
      if (f == 0) f1 = v;
      if (f == 1) f2 = v;
      if (missing_share > 0.0 && unit(rng) < missing_share) continue;
      r.values[f + 1] = facet::Cell::number(v);
    }
    r.values.back() = facet::Cell::number(1.0 + f1 + 0.5 * f2 + 0.05 * unit(rng));
    rows.push_back(std::move(r));
  }
  return facet::Dataset(std::move(descriptors), std::move(rows));
}

}  // namespace bench
