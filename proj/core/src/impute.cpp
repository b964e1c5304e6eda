#include "facet/impute.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "facet/errors.hpp"
#include "facet/metric.hpp"

namespace facet {

namespace {

long long checked_round(double v) { return std::llround(v); }

Cell aggregate_numeric(const FactorDescriptor& d, double mean_value,
                       const std::vector<double>& observed) {
  if (d.scale == Scale::Continuous) return Cell::number(mean_value);
  if (d.scale == Scale::Integer) return Cell::number(static_cast<double>(checked_round(mean_value)));
  // Ordinal: round to the nearest level and clamp into the observed range.
  long long level = checked_round(mean_value);
  const auto lo = static_cast<long long>(*std::min_element(observed.begin(), observed.end()));
  const auto hi = static_cast<long long>(*std::max_element(observed.begin(), observed.end()));
  level = std::clamp(level, lo, hi);
  return Cell::level(static_cast<int>(level));
}

// Mode of donor levels; ties resolved by a draw seeded per cell.
Cell modal_level(const std::vector<int>& levels, std::uint64_t seed, std::size_t record,
                 std::size_t column) {
  std::map<int, std::size_t> counts;
  for (int level : levels) ++counts[level];
  std::size_t best = 0;
  for (const auto& [level, count] : counts) best = std::max(best, count);
  std::vector<int> tied;
  for (const auto& [level, count] : counts)
    if (count == best) tied.push_back(level);
  if (tied.size() == 1) return Cell::level(tied.front());
  std::seed_seq seq{seed, static_cast<std::uint64_t>(record), static_cast<std::uint64_t>(column)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
  return Cell::level(tied[pick(rng)]);
}

}  // namespace

Dataset knn_impute(const Dataset& ds, const ImputationConfig& cfg, std::uint64_t seed) {
  if (cfg.k < 1) throw ValidationError("imputation donor count k must be at least 1");
  if (ds.records().size() < 2) throw ValidationError("imputation needs at least 2 records");

  const auto& cols = ds.independent_columns();
  const auto& records = ds.records();
  const std::size_t n = records.size();
  const DiffScaler scaler(ds);

  // Observed per-column values (numeric view) and levels, for fallbacks and clamping.
  std::map<std::size_t, std::vector<double>> observed;
  std::map<std::size_t, std::vector<int>> observed_levels;
  for (std::size_t c : cols) {
    const FactorDescriptor& d = ds.descriptors()[c];
    auto& vals = observed[c];
    auto& levels = observed_levels[c];
    for (const ProjectRecord& r : records) {
      if (r.values[c].is_missing()) continue;
      if (d.scale == Scale::Nominal)
        levels.push_back(r.values[c].level());
      else
        vals.push_back(ds.numeric_value(r.values[c], c));
    }
    if (vals.empty() && levels.empty())
      throw ValidationError(
          fmt::format("factor '{}' is missing in every record and cannot be imputed",
                      ds.descriptors()[c].name));
  }

  std::vector<ProjectRecord> out = records;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c : cols) {
      if (!records[i].values[c].is_missing()) continue;
      const FactorDescriptor& d = ds.descriptors()[c];

      // Donors: other records carrying this factor, at finite distance.
      std::vector<std::pair<double, std::size_t>> donors;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || records[j].values[c].is_missing()) continue;
        const double dist = heterogeneous_distance(scaler, records[i], records[j], cols);
        if (!std::isfinite(dist)) continue;
        donors.emplace_back(dist, j);
      }
      std::sort(donors.begin(), donors.end());
      if (donors.size() > cfg.k) donors.resize(cfg.k);

      if (donors.empty()) {
        // Fallback: column mean (numeric/ordinal) or column mode (nominal).
        if (d.scale == Scale::Nominal) {
          out[i].values[c] = modal_level(observed_levels.at(c), seed, i, c);
        } else {
          const auto& vals = observed.at(c);
          const double mean_value =
              std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
          out[i].values[c] = aggregate_numeric(d, mean_value, vals);
        }
        continue;
      }

      if (d.scale == Scale::Nominal) {
        std::vector<int> levels;
        levels.reserve(donors.size());
        for (const auto& [dist, j] : donors) levels.push_back(records[j].values[c].level());
        out[i].values[c] = modal_level(levels, seed, i, c);
      } else {
        double sum = 0.0;
        for (const auto& [dist, j] : donors) sum += ds.numeric_value(records[j].values[c], c);
        out[i].values[c] = aggregate_numeric(d, sum / static_cast<double>(donors.size()),
                                             observed.at(c));
      }
    }
  }
  return Dataset(ds.descriptors(), std::move(out));
}

}  // namespace facet
