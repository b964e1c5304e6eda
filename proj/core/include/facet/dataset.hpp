#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facet/cell.hpp"
#include "facet/errors.hpp"

namespace facet {

enum class Scale { Continuous, Integer, Ordinal, Nominal };
enum class Role { Independent, Dependent, Identifier, Size };

std::string_view to_string(Scale scale);
std::string_view to_string(Role role);

/// Typed description of one dataset column.
struct FactorDescriptor {
  std::string name;
  Scale scale = Scale::Continuous;
  Role role = Role::Independent;
  std::string category;             // one of project/process/personnel/product/context, or empty
  std::vector<std::string> levels;  // ordinal/nominal scales only

  bool is_numeric() const { return scale == Scale::Continuous || scale == Scale::Integer; }
  bool has_levels() const { return scale == Scale::Ordinal || scale == Scale::Nominal; }
};

/// One project's measurements. `values` is aligned with the owning dataset's
/// descriptor order; the identifier column, when present, is mirrored into
/// `id` and its cell slot stays blank.
struct ProjectRecord {
  std::string id;
  std::vector<Cell> values;
};

/// Immutable, validated project dataset. All operations on datasets are pure
/// functions returning new values, so instances are safe to share across
/// concurrent workers.
class Dataset {
 public:
  Dataset(std::vector<FactorDescriptor> descriptors, std::vector<ProjectRecord> records);

  const std::vector<FactorDescriptor>& descriptors() const { return descriptors_; }
  const std::vector<ProjectRecord>& records() const { return records_; }

  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;

  const std::vector<std::size_t>& independent_columns() const { return independent_; }
  std::optional<std::size_t> dependent_column() const { return dependent_; }
  std::optional<std::size_t> identifier_column() const { return identifier_; }

  /// Column index of the dependent variable; requires it to exist and to be
  /// numeric when `numeric` is set.
  std::size_t require_dependent(bool numeric = true) const;

  /// True when no independent cell is MISSING.
  bool complete_independents() const;

  /// Numeric view of a cell: the number itself for continuous/integer
  /// factors, the level index for ordinal factors. Nominal factors have no
  /// numeric view and throw.
  double numeric_value(const Cell& cell, std::size_t column) const;

 private:
  std::vector<FactorDescriptor> descriptors_;
  std::vector<ProjectRecord> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::size_t> independent_;
  std::optional<std::size_t> dependent_;
  std::optional<std::size_t> identifier_;
};

/// Missing-data ratios, counted over independent-factor cells only.
struct MissingnessProfile {
  std::vector<std::pair<std::string, double>> factor_ratios;  // per independent factor
  std::vector<std::pair<std::string, double>> record_ratios;  // per record id
  double total = 0.0;
};

struct PruneConfig {
  double factor_threshold = 0.90;   // drop factor when missing ratio >= this
  double project_threshold = 0.55;  // drop record when missing ratio > this
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;
};

struct NormalizedDataset {
  Dataset dataset;
  std::map<std::string, ValueRange> ranges;  // inverse-transform data per factor
};

/// Reads a CSV data file against a JSON schema. Missing cells are the
/// literal token "?"; an empty field is a parse error.
Dataset load_dataset(const std::filesystem::path& data_file,
                     const std::filesystem::path& schema_file);

MissingnessProfile profile_missingness(const Dataset& ds);

/// Two fixed passes: drop independent factors with missing ratio >= the
/// factor threshold, then (ratios recomputed on surviving factors) drop
/// records with missing ratio > the project threshold. Identifier, dependent
/// and size columns are never dropped.
Dataset prune_missing(const Dataset& ds, const PruneConfig& cfg = {});

/// Maps every numeric independent factor to [0,1] by (v-min)/(max-min);
/// constant factors map to 0. Integer factors become continuous in the
/// result. Dependent and size columns are left untouched so the dataset's
/// own invariants (positive dependent) keep holding.
NormalizedDataset normalize_numeric(const Dataset& ds);

/// Inverse of normalize_numeric given the ranges it returned.
Dataset denormalize_numeric(const Dataset& ds, const std::map<std::string, ValueRange>& ranges);

void write_dataset_csv(const Dataset& ds, std::ostream& out);
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

}  // namespace facet
