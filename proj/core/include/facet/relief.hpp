#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "facet/dataset.hpp"

namespace facet {

struct ReliefConfig {
  std::optional<std::size_t> m;  // instance iterations; empty = one full sweep
  std::size_t k = 10;            // neighbors per instance
  double sigma = 20.0;           // rank-exponential decay
};

struct WeightVector {
  std::vector<std::pair<std::string, double>> weights;  // factor order of the source dataset
  std::size_t m = 0;
  std::size_t k = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  bool constant_dependent = false;

  double at(std::string_view factor) const;
};

// Regression ReliefF over a complete dataset with a numeric dependent factor.
// Each of m seeded instance picks accumulates, over its k nearest neighbors
// (influence exp(-(rank/sigma)^2), normalized per instance), the dependent
// difference, each factor's difference, and their product; the weight is
// W[f] = N_dCdA[f]/N_dC - (N_dA[f] - N_dCdA[f])/(m' - N_dC)
// with m' the total accumulated influence and 0/0 guarded to 0. When m equals
// the record count the instances are a deterministic full sweep and no random
// draws occur. Records with a missing dependent value are left out entirely.
WeightVector rrelieff(const Dataset& ds, const ReliefConfig& cfg, std::uint64_t seed);

// CSV rows factor,weight,rank sorted by weight descending, ties by name.
void write_weights_csv(const WeightVector& wv, std::ostream& out);

}  // namespace facet
