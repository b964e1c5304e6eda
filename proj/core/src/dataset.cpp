#include "facet/dataset.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "csv.hpp"

namespace facet {

namespace {

const std::set<std::string, std::less<>> kCategories = {"project", "process", "personnel",
                                                        "product", "context"};

Scale parse_scale(std::string_view s, std::string_view column) {
  if (s == "continuous") return Scale::Continuous;
  if (s == "integer") return Scale::Integer;
  if (s == "ordinal") return Scale::Ordinal;
  if (s == "nominal") return Scale::Nominal;
  throw ValidationError(fmt::format(
      "schema column '{}': unknown scale '{}' (expected continuous|integer|ordinal|nominal)",
      column, s));
}

Role parse_role(std::string_view s, std::string_view column) {
  if (s == "independent") return Role::Independent;
  if (s == "dependent") return Role::Dependent;
  if (s == "identifier") return Role::Identifier;
  if (s == "size") return Role::Size;
  throw ValidationError(fmt::format(
      "schema column '{}': unknown role '{}' (expected independent|dependent|identifier|size)",
      column, s));
}

std::optional<double> parse_number(std::string_view s) {
  double value = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::string_view to_string(Scale scale) {
  switch (scale) {
    case Scale::Continuous: return "continuous";
    case Scale::Integer: return "integer";
    case Scale::Ordinal: return "ordinal";
    case Scale::Nominal: return "nominal";
  }
  return "?";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::Independent: return "independent";
    case Role::Dependent: return "dependent";
    case Role::Identifier: return "identifier";
    case Role::Size: return "size";
  }
  return "?";
}

Dataset::Dataset(std::vector<FactorDescriptor> descriptors, std::vector<ProjectRecord> records)
    : descriptors_(std::move(descriptors)), records_(std::move(records)) {
  for (std::size_t c = 0; c < descriptors_.size(); ++c) {
    const FactorDescriptor& d = descriptors_[c];
    if (d.name.empty()) throw ValidationError("factor with empty name");
    if (!index_.emplace(d.name, c).second)
      throw ValidationError(fmt::format("duplicate factor name '{}'", d.name));
    if (!d.category.empty() && !kCategories.contains(d.category))
      throw ValidationError(fmt::format("factor '{}': unknown category '{}'", d.name, d.category));
    if (d.role != Role::Identifier && d.has_levels()) {
      if (d.levels.size() < 2)
        throw ValidationError(
            fmt::format("factor '{}': {} scale needs at least 2 declared levels", d.name,
                        to_string(d.scale)));
      std::set<std::string_view> seen;
      for (const std::string& level : d.levels)
        if (!seen.insert(level).second)
          throw ValidationError(fmt::format("factor '{}': duplicate level '{}'", d.name, level));
    } else if (!d.levels.empty()) {
      throw ValidationError(
          fmt::format("factor '{}': levels declared on a {} scale", d.name, to_string(d.scale)));
    }
    switch (d.role) {
      case Role::Independent: independent_.push_back(c); break;
      case Role::Dependent:
        if (dependent_)
          throw ValidationError(fmt::format("more than one dependent factor: '{}' and '{}'",
                                            descriptors_[*dependent_].name, d.name));
        dependent_ = c;
        break;
      case Role::Identifier:
        if (identifier_)
          throw ValidationError(fmt::format("more than one identifier column: '{}' and '{}'",
                                            descriptors_[*identifier_].name, d.name));
        identifier_ = c;
        break;
      case Role::Size: break;
    }
  }

  std::set<std::string_view> ids;
  for (const ProjectRecord& r : records_) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (!ids.insert(r.id).second)
      throw ValidationError(fmt::format("duplicate record id '{}'", r.id));
    if (r.values.size() != descriptors_.size())
      throw ValidationError(fmt::format("record '{}': {} values for {} factors", r.id,
                                        r.values.size(), descriptors_.size()));
    for (std::size_t c = 0; c < descriptors_.size(); ++c) {
      const FactorDescriptor& d = descriptors_[c];
      const Cell& cell = r.values[c];
      if (d.role == Role::Identifier) {
        if (!cell.is_missing())
          throw ValidationError(
              fmt::format("record '{}': identifier column '{}' must not carry a cell value", r.id,
                          d.name));
        continue;
      }
      if (cell.is_missing()) continue;
      if (d.is_numeric()) {
        if (!cell.is_number())
          throw ValidationError(
              fmt::format("record '{}', factor '{}': expected a number", r.id, d.name));
        if (d.scale == Scale::Integer && cell.number() != std::nearbyint(cell.number()))
          throw ValidationError(fmt::format(
              "record '{}', factor '{}': value {} is not an integer", r.id, d.name, cell.number()));
      } else {
        if (!cell.is_level() || cell.level() < 0 ||
            static_cast<std::size_t>(cell.level()) >= d.levels.size())
          throw ValidationError(
              fmt::format("record '{}', factor '{}': level out of range", r.id, d.name));
      }
      if (d.role == Role::Dependent && d.is_numeric() && cell.number() <= 0.0)
        throw ValidationError(
            fmt::format("record '{}': dependent '{}' must be strictly positive, got {}", r.id,
                        d.name, cell.number()));
    }
  }
}

std::optional<std::size_t> Dataset::column(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dataset::require_column(std::string_view name) const {
  auto c = column(name);
  if (!c) throw ValidationError(fmt::format("unknown factor '{}'", name));
  return *c;
}

std::size_t Dataset::require_dependent(bool numeric) const {
  if (!dependent_) throw ValidationError("dataset has no dependent factor");
  if (numeric && !descriptors_[*dependent_].is_numeric())
    throw ValidationError(fmt::format("dependent factor '{}' is not numeric",
                                      descriptors_[*dependent_].name));
  return *dependent_;
}

bool Dataset::complete_independents() const {
  for (const ProjectRecord& r : records_)
    for (std::size_t c : independent_)
      if (r.values[c].is_missing()) return false;
  return true;
}

double Dataset::numeric_value(const Cell& cell, std::size_t column) const {
  const FactorDescriptor& d = descriptors_[column];
  if (d.is_numeric()) return cell.number();
  if (d.scale == Scale::Ordinal) return static_cast<double>(cell.level());
  throw std::logic_error(fmt::format("factor '{}' is nominal and has no numeric view", d.name));
}

Dataset load_dataset(const std::filesystem::path& data_file,
                     const std::filesystem::path& schema_file) {
  std::ifstream schema_in(schema_file);
  if (!schema_in) throw ParseError(fmt::format("cannot open '{}'", schema_file.string()));
  nlohmann::json schema;
  try {
    schema = nlohmann::json::parse(schema_in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", schema_file.filename().string(), e.what()));
  }
  if (!schema.is_object())
    throw ValidationError(
        fmt::format("{}: schema must be a JSON object mapping column name to its description",
                    schema_file.filename().string()));

  csv::Table table = csv::read_file(data_file);

  std::set<std::string> header_names(table.header.begin(), table.header.end());
  if (header_names.size() != table.header.size())
    throw ValidationError(fmt::format("{}: duplicate column in header", data_file.filename().string()));
  for (const auto& [name, spec] : schema.items())
    if (!header_names.contains(name))
      throw ValidationError(
          fmt::format("schema declares column '{}' absent from the data header", name));

  std::vector<FactorDescriptor> descriptors;
  descriptors.reserve(table.header.size());
  for (const std::string& name : table.header) {
    if (!schema.contains(name))
      throw ValidationError(fmt::format("data column '{}' is not declared in the schema", name));
    const nlohmann::json& spec = schema.at(name);
    if (!spec.is_object())
      throw ValidationError(fmt::format("schema column '{}': expected an object", name));
    for (const auto& [key, value] : spec.items())
      if (key != "scale" && key != "role" && key != "category" && key != "levels")
        throw ValidationError(fmt::format("schema column '{}': unknown key '{}'", name, key));

    FactorDescriptor d;
    d.name = name;
    d.role = spec.contains("role") ? parse_role(spec.at("role").get<std::string>(), name)
                                   : Role::Independent;
    if (spec.contains("scale")) {
      d.scale = parse_scale(spec.at("scale").get<std::string>(), name);
    } else if (d.role != Role::Identifier) {
      throw ValidationError(fmt::format("schema column '{}': missing scale", name));
    }
    if (spec.contains("category")) d.category = spec.at("category").get<std::string>();
    if (spec.contains("levels")) {
      if (!spec.at("levels").is_array())
        throw ValidationError(fmt::format("schema column '{}': levels must be an array", name));
      for (const nlohmann::json& level : spec.at("levels"))
        d.levels.push_back(level.get<std::string>());
    }
    if (d.role != Role::Identifier && d.has_levels() && d.levels.empty())
      throw ValidationError(
          fmt::format("schema column '{}': {} scale requires declared levels", name,
                      to_string(d.scale)));
    descriptors.push_back(std::move(d));
  }

  std::vector<ProjectRecord> records;
  records.reserve(table.rows.size());
  for (const csv::Row& row : table.rows) {
    if (row.fields.size() != table.header.size())
      throw ParseError(fmt::format("{}:{}: row has {} fields, header has {}",
                                   data_file.filename().string(), row.line, row.fields.size(),
                                   table.header.size()));
    ProjectRecord rec;
    rec.values.resize(descriptors.size());
    for (std::size_t c = 0; c < descriptors.size(); ++c) {
      const FactorDescriptor& d = descriptors[c];
      const std::string& raw = row.fields[c];
      if (raw.empty())
        throw ParseError(fmt::format("{}:{}: empty cell in column '{}'; use \"?\" for missing",
                                     data_file.filename().string(), row.line, d.name));
      if (d.role == Role::Identifier) {
        if (raw == "?")
          throw ValidationError(fmt::format("{}:{}: identifier must not be missing",
                                            data_file.filename().string(), row.line));
        rec.id = raw;
        continue;
      }
      if (raw == "?") continue;  // stays missing
      if (d.is_numeric()) {
        auto v = parse_number(raw);
        if (!v)
          throw ValidationError(fmt::format("record '{}', factor '{}': '{}' is not numeric",
                                            rec.id.empty() ? std::to_string(records.size() + 1)
                                                           : rec.id,
                                            d.name, raw));
        rec.values[c] = Cell::number(*v);
      } else {
        auto it = std::find(d.levels.begin(), d.levels.end(), raw);
        if (it == d.levels.end())
          throw ValidationError(fmt::format("record '{}', factor '{}': '{}' is not a declared level",
                                            rec.id.empty() ? std::to_string(records.size() + 1)
                                                           : rec.id,
                                            d.name, raw));
        rec.values[c] = Cell::level(static_cast<int>(it - d.levels.begin()));
      }
    }
    if (rec.id.empty()) rec.id = std::to_string(records.size() + 1);
    records.push_back(std::move(rec));
  }

  return Dataset(std::move(descriptors), std::move(records));
}

MissingnessProfile profile_missingness(const Dataset& ds) {
  MissingnessProfile profile;
  const auto& cols = ds.independent_columns();
  const auto& records = ds.records();

  std::size_t total_missing = 0;
  for (std::size_t c : cols) {
    std::size_t missing = 0;
    for (const ProjectRecord& r : records)
      if (r.values[c].is_missing()) ++missing;
    total_missing += missing;
    profile.factor_ratios.emplace_back(
        ds.descriptors()[c].name,
        records.empty() ? 0.0 : static_cast<double>(missing) / static_cast<double>(records.size()));
  }
  for (const ProjectRecord& r : records) {
    std::size_t missing = 0;
    for (std::size_t c : cols)
      if (r.values[c].is_missing()) ++missing;
    profile.record_ratios.emplace_back(
        r.id, cols.empty() ? 0.0 : static_cast<double>(missing) / static_cast<double>(cols.size()));
  }
  const std::size_t denom = cols.size() * records.size();
  profile.total = denom == 0 ? 0.0 : static_cast<double>(total_missing) / static_cast<double>(denom);
  return profile;
}

Dataset prune_missing(const Dataset& ds, const PruneConfig& cfg) {
  if (cfg.factor_threshold <= 0.0 || cfg.factor_threshold > 1.0)
    throw ValidationError(fmt::format("factor threshold {} outside (0,1]", cfg.factor_threshold));
  if (cfg.project_threshold <= 0.0 || cfg.project_threshold > 1.0)
    throw ValidationError(fmt::format("project threshold {} outside (0,1]", cfg.project_threshold));

  const auto& records = ds.records();
  const std::size_t n = records.size();

  // Pass 1: factors. Identifier, dependent and size columns always survive.
  std::vector<std::size_t> keep_cols;
  std::vector<std::size_t> surviving_independents;
  for (std::size_t c = 0; c < ds.descriptors().size(); ++c) {
    if (ds.descriptors()[c].role != Role::Independent) {
      keep_cols.push_back(c);
      continue;
    }
    std::size_t missing = 0;
    for (const ProjectRecord& r : records)
      if (r.values[c].is_missing()) ++missing;
    double ratio = n == 0 ? 0.0 : static_cast<double>(missing) / static_cast<double>(n);
    if (ratio >= cfg.factor_threshold) continue;
    keep_cols.push_back(c);
    surviving_independents.push_back(c);
  }
  if (!ds.independent_columns().empty() && surviving_independents.empty())
    throw ValidationError(
        "pruning removed every independent factor; raise --factor-thresh or clean the data");
  std::sort(keep_cols.begin(), keep_cols.end());

  // Pass 2: records, with ratios over the surviving independent factors.
  std::vector<const ProjectRecord*> keep_records;
  for (const ProjectRecord& r : records) {
    std::size_t missing = 0;
    for (std::size_t c : surviving_independents)
      if (r.values[c].is_missing()) ++missing;
    double ratio = surviving_independents.empty()
                       ? 0.0
                       : static_cast<double>(missing) / static_cast<double>(surviving_independents.size());
    if (ratio > cfg.project_threshold) continue;
    keep_records.push_back(&r);
  }
  if (!records.empty() && keep_records.empty())
    throw ValidationError(
        "pruning removed every record; raise --project-thresh or clean the data");

  std::vector<FactorDescriptor> descriptors;
  descriptors.reserve(keep_cols.size());
  for (std::size_t c : keep_cols) descriptors.push_back(ds.descriptors()[c]);
  std::vector<ProjectRecord> pruned;
  pruned.reserve(keep_records.size());
  for (const ProjectRecord* r : keep_records) {
    ProjectRecord rec;
    rec.id = r->id;
    rec.values.reserve(keep_cols.size());
    for (std::size_t c : keep_cols) rec.values.push_back(r->values[c]);
    pruned.push_back(std::move(rec));
  }
  return Dataset(std::move(descriptors), std::move(pruned));
}

NormalizedDataset normalize_numeric(const Dataset& ds) {
  std::map<std::string, ValueRange> ranges;
  std::vector<FactorDescriptor> descriptors = ds.descriptors();
  std::vector<ProjectRecord> records = ds.records();

  for (std::size_t c : ds.independent_columns()) {
    FactorDescriptor& d = descriptors[c];
    if (!d.is_numeric()) continue;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const ProjectRecord& r : records) {
      if (r.values[c].is_missing()) continue;
      double v = r.values[c].number();
      lo = any ? std::min(lo, v) : v;
      hi = any ? std::max(hi, v) : v;
      any = true;
    }
    if (!any) lo = hi = 0.0;
    ranges[d.name] = ValueRange{lo, hi};
    for (ProjectRecord& r : records) {
      if (r.values[c].is_missing()) continue;
      double v = r.values[c].number();
      r.values[c] = Cell::number(hi == lo ? 0.0 : (v - lo) / (hi - lo));
    }
    d.scale = Scale::Continuous;  // normalized values are fractional
  }
  return NormalizedDataset{Dataset(std::move(descriptors), std::move(records)), std::move(ranges)};
}

Dataset denormalize_numeric(const Dataset& ds, const std::map<std::string, ValueRange>& ranges) {
  std::vector<FactorDescriptor> descriptors = ds.descriptors();
  std::vector<ProjectRecord> records = ds.records();
  for (const auto& [name, range] : ranges) {
    std::size_t c = ds.require_column(name);
    if (!descriptors[c].is_numeric())
      throw ValidationError(fmt::format("factor '{}' is not numeric", name));
    for (ProjectRecord& r : records) {
      if (r.values[c].is_missing()) continue;
      r.values[c] = Cell::number(r.values[c].number() * (range.max - range.min) + range.min);
    }
  }
  return Dataset(std::move(descriptors), std::move(records));
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
  const auto& descriptors = ds.descriptors();
  for (std::size_t c = 0; c < descriptors.size(); ++c) {
    if (c) out << ',';
    out << csv::escape(descriptors[c].name);
  }
  out << '\n';
  for (const ProjectRecord& r : ds.records()) {
    for (std::size_t c = 0; c < descriptors.size(); ++c) {
      if (c) out << ',';
      const FactorDescriptor& d = descriptors[c];
      if (d.role == Role::Identifier) {
        out << csv::escape(r.id);
        continue;
      }
      const Cell& cell = r.values[c];
      if (cell.is_missing()) {
        out << '?';
      } else if (d.is_numeric()) {
        out << csv::format_double(cell.number());
      } else {
        out << csv::escape(d.levels[static_cast<std::size_t>(cell.level())]);
      }
    }
    out << '\n';
  }
}

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_dataset_csv(ds, out);
}

}  // namespace facet
