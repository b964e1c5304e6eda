#include "facet/metric.hpp"

#include <cmath>
#include <limits>

namespace facet {

DiffScaler::DiffScaler(const Dataset& ds) : ds_(&ds), widths_(ds.descriptors().size(), 0.0) {
  for (std::size_t c = 0; c < ds.descriptors().size(); ++c) {
    const FactorDescriptor& d = ds.descriptors()[c];
    if (d.role == Role::Identifier || d.scale == Scale::Nominal) continue;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const ProjectRecord& r : ds.records()) {
      if (r.values[c].is_missing()) continue;
      const double v = ds.numeric_value(r.values[c], c);
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
    widths_[c] = any ? hi - lo : 0.0;
  }
}

double DiffScaler::diff(std::size_t column, const Cell& a, const Cell& b) const {
  const FactorDescriptor& d = ds_->descriptors()[column];
  if (d.scale == Scale::Nominal) return a.level() == b.level() ? 0.0 : 1.0;
  const double w = widths_[column];
  if (w == 0.0) return 0.0;
  return std::fabs(ds_->numeric_value(a, column) - ds_->numeric_value(b, column)) / w;
}

double heterogeneous_distance(const DiffScaler& scaler, const ProjectRecord& a,
                              const ProjectRecord& b, std::span<const std::size_t> columns) {
  double sum = 0.0;
  std::size_t shared = 0;
  for (std::size_t c : columns) {
    if (a.values[c].is_missing() || b.values[c].is_missing()) continue;
    const double d = scaler.diff(c, a.values[c], b.values[c]);
    sum += d * d;
    ++shared;
  }
  if (shared == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(sum / static_cast<double>(shared));
}

double manhattan_distance(const DiffScaler& scaler, const ProjectRecord& a,
                          const ProjectRecord& b, std::span<const std::size_t> columns) {
  double sum = 0.0;
  for (std::size_t c : columns) sum += scaler.diff(c, a.values[c], b.values[c]);
  return sum;
}

}  // namespace facet
