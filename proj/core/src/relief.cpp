#include "facet/relief.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "csv.hpp"
#include "facet/errors.hpp"
#include "facet/metric.hpp"

namespace facet {

double WeightVector::at(std::string_view factor) const {
  for (const auto& [name, w] : weights)
    if (name == factor) return w;
  throw ValidationError(fmt::format("no weight for factor '{}'", factor));
}

WeightVector rrelieff(const Dataset& ds, const ReliefConfig& cfg, std::uint64_t seed) {
  if (cfg.k < 1) throw ValidationError("rrelieff needs k >= 1");
  if (cfg.sigma <= 0.0) throw ValidationError("rrelieff needs sigma > 0");
  const std::size_t dep = ds.require_dependent();

  // Only records carrying the dependent value participate.
  std::vector<ProjectRecord> usable;
  for (const ProjectRecord& r : ds.records())
    if (!r.values[dep].is_missing()) usable.push_back(r);
  Dataset data(ds.descriptors(), std::move(usable));

  const auto& cols = data.independent_columns();
  const auto& records = data.records();
  const std::size_t n = records.size();
  if (cols.empty()) throw ValidationError("rrelieff needs at least one independent factor");
  if (n < cfg.k + 1)
    throw ValidationError(fmt::format(
        "rrelieff needs at least k+1 = {} records with a dependent value, got {}", cfg.k + 1, n));
  if (!data.complete_independents())
    throw ValidationError("rrelieff requires a complete dataset; impute missing cells first");
  const std::size_t m = cfg.m.value_or(n);
  if (m < 1) throw ValidationError("rrelieff needs m >= 1");

  WeightVector wv;
  wv.m = m;
  wv.k = cfg.k;
  wv.sigma = cfg.sigma;
  wv.seed = seed;
  for (std::size_t c : cols) wv.weights.emplace_back(data.descriptors()[c].name, 0.0);

  const DiffScaler scaler(data);
  if (scaler.width(dep) == 0.0) {
    wv.constant_dependent = true;
    return wv;
  }

  // Rank influences, normalized to sum 1 over the k neighbors.
  std::vector<double> influence(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    const double rank = static_cast<double>(j + 1) / cfg.sigma;
    influence[j] = std::exp(-rank * rank);
  }
  const double influence_sum = std::accumulate(influence.begin(), influence.end(), 0.0);
  for (double& v : influence) v /= influence_sum;

  // Instance sequence: full sweep when m == n, seeded uniform picks otherwise.
  std::vector<std::size_t> instances(m);
  if (m == n) {
    std::iota(instances.begin(), instances.end(), std::size_t{0});
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t& i : instances) i = pick(rng);
  }

  double n_dc = 0.0;
  double total_influence = 0.0;
  std::vector<double> n_da(cols.size(), 0.0);
  std::vector<double> n_dcda(cols.size(), 0.0);

  std::vector<std::pair<double, std::size_t>> neighbors;
  for (std::size_t i : instances) {
    neighbors.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      neighbors.emplace_back(manhattan_distance(scaler, records[i], records[j], cols), j);
    }
    std::sort(neighbors.begin(), neighbors.end(),
              [&](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first < b.first;
                return records[a.second].id < records[b.second].id;
              });

    for (std::size_t rank = 0; rank < cfg.k; ++rank) {
      const std::size_t j = neighbors[rank].second;
      const double w = influence[rank];
      const double dc = scaler.diff(dep, records[i].values[dep], records[j].values[dep]);
      n_dc += dc * w;
      total_influence += w;
      for (std::size_t f = 0; f < cols.size(); ++f) {
        const std::size_t c = cols[f];
        const double da = scaler.diff(c, records[i].values[c], records[j].values[c]);
        n_da[f] += da * w;
        n_dcda[f] += dc * da * w;
      }
    }
  }

  for (std::size_t f = 0; f < cols.size(); ++f) {
    const double hit = n_dc == 0.0 ? 0.0 : n_dcda[f] / n_dc;
    const double rest = total_influence - n_dc;
    const double miss = rest == 0.0 ? 0.0 : (n_da[f] - n_dcda[f]) / rest;
    double w = hit - miss;
    assert(w >= -1.0 - 1e-9 && w <= 1.0 + 1e-9);
    wv.weights[f].second = std::clamp(w, -1.0, 1.0);
  }
  return wv;
}

void write_weights_csv(const WeightVector& wv, std::ostream& out) {
  std::vector<std::pair<std::string, double>> rows = wv.weights;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  out << "factor,weight,rank\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << csv::escape(rows[i].first) << ',' << csv::format_double(rows[i].second) << ','
        << (i + 1) << '\n';
}

}  // namespace facet
