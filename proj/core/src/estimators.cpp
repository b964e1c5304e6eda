#include "facet/estimators.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include "csv.hpp"
#include "facet/errors.hpp"
#include "facet/metric.hpp"
#include "facet/stats.hpp"

namespace facet {

namespace {

std::vector<std::size_t> resolve_active(const Dataset& ds, const EstimationQuery& q) {
  if (q.active.factors.empty()) throw ValidationError("the active factor set is empty");
  std::vector<std::string> names = q.active.factors;
  std::sort(names.begin(), names.end());
  std::vector<std::size_t> cols;
  for (const std::string& name : names) {
    const std::size_t c = ds.require_column(name);
    if (ds.descriptors()[c].role != Role::Independent)
      throw ValidationError(fmt::format("factor '{}' is not independent", name));
    if (q.record.values[c].is_missing())
      throw ValidationError(fmt::format("query is missing active factor '{}'", name));
    cols.push_back(c);
  }
  return cols;
}

std::vector<std::size_t> training_records(const Dataset& ds) {
  const std::size_t dep = ds.require_dependent();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.records().size(); ++i)
    if (!ds.records()[i].values[dep].is_missing()) rows.push_back(i);
  if (rows.empty()) throw ValidationError("no record carries a dependent value");
  return rows;
}

// Quantile edges at i/count for i in 1..count-1 over a sorted sample; a value
// falls in the bin counting the edges strictly below it.
std::vector<double> quantile_edges(std::vector<double> values, std::size_t count) {
  std::sort(values.begin(), values.end());
  std::vector<double> edges;
  edges.reserve(count - 1);
  for (std::size_t i = 1; i < count; ++i)
    edges.push_back(stats::quantile(values, static_cast<double>(i) / static_cast<double>(count)));
  return edges;
}

std::size_t bin_of(double v, const std::vector<double>& edges) {
  std::size_t bin = 0;
  for (double e : edges)
    if (e < v) ++bin;
  return bin;
}

double entropy_of(const std::vector<std::size_t>& counts, std::size_t total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double knn_estimate(const Dataset& ds, const EstimationQuery& q, std::size_t k) {
  if (k < 1) throw ValidationError("knn needs k >= 1");
  const std::vector<std::size_t> cols = resolve_active(ds, q);
  const std::vector<std::size_t> rows = training_records(ds);
  if (k > rows.size())
    throw ValidationError(
        fmt::format("knn needs k <= {} records with a dependent value, got k={}", rows.size(), k));

  const std::size_t dep = ds.require_dependent();
  const DiffScaler scaler(ds);
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(rows.size());
  for (std::size_t i : rows)
    order.emplace_back(heterogeneous_distance(scaler, q.record, ds.records()[i], cols), i);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return ds.records()[a.second].id < ds.records()[b.second].id;
  });

  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    sum += ds.records()[order[j].second].values[dep].number();
  return sum / static_cast<double>(k);
}

std::pair<double, OsrTrace> osr_estimate(const Dataset& ds, const EstimationQuery& q,
                                         const OsrConfig& cfg) {
  if (cfg.bins < 2) throw ValidationError("osr needs at least 2 bins");
  if (cfg.classes < 2) throw ValidationError("osr needs at least 2 dependent classes");
  if (cfg.min_subset < 2) throw ValidationError("osr needs a minimum subset of at least 2");
  const std::vector<std::size_t> cols = resolve_active(ds, q);
  const std::vector<std::size_t> rows = training_records(ds);
  const std::size_t dep = ds.require_dependent();
  for (std::size_t i : rows)
    for (std::size_t c : cols)
      if (ds.records()[i].values[c].is_missing())
        throw ValidationError(fmt::format("record '{}' is missing active factor '{}'",
                                          ds.records()[i].id, ds.descriptors()[c].name));

  // Dependent classes: equal-frequency split of the training values.
  std::vector<double> dep_values;
  dep_values.reserve(rows.size());
  for (std::size_t i : rows) dep_values.push_back(ds.records()[i].values[dep].number());
  const std::vector<double> class_edges = quantile_edges(dep_values, cfg.classes);
  std::vector<std::size_t> dep_class;
  dep_class.reserve(rows.size());
  for (double v : dep_values) dep_class.push_back(bin_of(v, class_edges));

  // Per-factor discretization of the query and the training records.
  struct Discretized {
    std::size_t column;
    bool binned;                       // numeric factors use quantile bins
    std::vector<double> edges;        // binned only
    std::size_t query_bin = 0;        // bin or level index
    std::vector<std::size_t> values;  // per training row
    std::string description;
  };
  std::vector<Discretized> facets;
  for (std::size_t c : cols) {
    const FactorDescriptor& d = ds.descriptors()[c];
    Discretized f;
    f.column = c;
    f.binned = d.is_numeric();
    if (f.binned) {
      std::vector<double> values;
      values.reserve(rows.size());
      for (std::size_t i : rows) values.push_back(ds.records()[i].values[c].number());
      f.edges = quantile_edges(values, cfg.bins);
      f.query_bin = bin_of(q.record.values[c].number(), f.edges);
      for (double v : values) f.values.push_back(bin_of(v, f.edges));
      f.description = fmt::format("{} in bin {} of {}", d.name, f.query_bin + 1, cfg.bins);
    } else {
      f.query_bin = static_cast<std::size_t>(q.record.values[c].level());
      for (std::size_t i : rows)
        f.values.push_back(static_cast<std::size_t>(ds.records()[i].values[c].level()));
      f.description = fmt::format("{} = {}", d.name,
                                  d.levels[static_cast<std::size_t>(f.query_bin)]);
    }
    facets.push_back(std::move(f));
  }

  auto entropy = [&](const std::vector<std::size_t>& subset) {
    std::vector<std::size_t> counts(cfg.classes, 0);
    for (std::size_t r : subset) ++counts[dep_class[r]];
    return entropy_of(counts, subset.size());
  };

  std::vector<std::size_t> subset(rows.size());
  std::iota(subset.begin(), subset.end(), std::size_t{0});
  double current_entropy = entropy(subset);
  std::set<std::size_t> used;
  OsrTrace trace;

  // Active factors arrive name-sorted, so keeping the first strict improvement
  // breaks dispersion ties by factor name.
  while (true) {
    const Discretized* best = nullptr;
    std::vector<std::size_t> best_subset;
    double best_entropy = current_entropy;
    for (const Discretized& f : facets) {
      if (used.contains(f.column)) continue;
      std::vector<std::size_t> retained;
      for (std::size_t r : subset)
        if (f.values[r] == f.query_bin) retained.push_back(r);
      if (retained.size() < cfg.min_subset) continue;
      const double h = entropy(retained);
      if (h >= best_entropy) continue;
      best = &f;
      best_subset = std::move(retained);
      best_entropy = h;
    }
    if (!best) break;
    used.insert(best->column);
    subset = std::move(best_subset);
    current_entropy = best_entropy;
    trace.predicates.push_back({ds.descriptors()[best->column].name, best->description});
    trace.subset_sizes.push_back(subset.size());
  }

  std::vector<double> terminal;
  terminal.reserve(subset.size());
  for (std::size_t r : subset) {
    terminal.push_back(dep_values[r]);
    trace.terminal_ids.push_back(ds.records()[rows[r]].id);
  }
  const double prediction = stats::median(terminal);
  trace.prediction = prediction;
  return {prediction, trace};
}

void write_trace_json(const OsrTrace& trace, std::ostream& out) {
  nlohmann::ordered_json j;
  j["predicates"] = nlohmann::ordered_json::array();
  for (const OsrPredicate& p : trace.predicates)
    j["predicates"].push_back({{"factor", p.factor}, {"description", p.description}});
  j["subset_sizes"] = trace.subset_sizes;
  j["terminal_ids"] = trace.terminal_ids;
  j["prediction"] = trace.prediction;
  out << j.dump(2) << '\n';
}

}  // namespace facet
