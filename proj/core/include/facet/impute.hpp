#pragma once

#include <cstdint>

#include "facet/dataset.hpp"

namespace facet {

struct ImputationConfig {
  std::size_t k = 5;  // donor count
};

// Fills every missing independent cell from the k nearest donor records.
// Distances are computed over the independent factors non-missing in both
// records; donors must carry the imputed factor. Numeric and ordinal gaps take
// the donor mean (integer and ordinal values rounded to the scale), nominal
// gaps the donor mode with seeded tie-breaking. Cells with no eligible donor
// fall back to the column mean/mode. Dependent cells are never touched, and
// every imputation reads only the original data.
Dataset knn_impute(const Dataset& ds, const ImputationConfig& cfg, std::uint64_t seed);

}  // namespace facet
