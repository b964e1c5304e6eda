#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "facet/dataset.hpp"

namespace facet {

// Scales pairwise cell differences into [0,1] using the ranges observed in a
// dataset: numeric and ordinal factors divide by max-min (a constant factor
// yields 0), nominal factors use 0/1 overlap.
class DiffScaler {
 public:
  explicit DiffScaler(const Dataset& ds);

  // Both cells must be non-missing and belong to `column` of the source dataset.
  double diff(std::size_t column, const Cell& a, const Cell& b) const;

  // Observed max-min on the numeric view; 0 for nominal or constant columns.
  double width(std::size_t column) const { return widths_[column]; }

 private:
  const Dataset* ds_;
  std::vector<double> widths_;
};

// Root of the mean squared per-factor difference over the columns where both
// records are non-missing; +infinity when they share no column.
double heterogeneous_distance(const DiffScaler& scaler, const ProjectRecord& a,
                              const ProjectRecord& b, std::span<const std::size_t> columns);

// Sum of per-factor differences over `columns`; every cell must be non-missing.
double manhattan_distance(const DiffScaler& scaler, const ProjectRecord& a,
                          const ProjectRecord& b, std::span<const std::size_t> columns);

}  // namespace facet
