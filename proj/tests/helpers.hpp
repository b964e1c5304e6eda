#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facet/dataset.hpp"

namespace testutil {

inline std::filesystem::path data_dir() { return FACET_TEST_DATA_DIR; }

inline std::filesystem::path data_file(const std::string& name) { return data_dir() / name; }

// Fresh scratch directory under the system temp root; callers clean up.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("facet-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline facet::FactorDescriptor continuous(const std::string& name,
                                          facet::Role role = facet::Role::Independent) {
  facet::FactorDescriptor d;
  d.name = name;
  d.scale = facet::Scale::Continuous;
  d.role = role;
  return d;
}

inline facet::FactorDescriptor ordinal(const std::string& name, int levels) {
  facet::FactorDescriptor d;
  d.name = name;
  d.scale = facet::Scale::Ordinal;
  for (int i = 1; i <= levels; ++i) d.levels.push_back(std::to_string(i));
  return d;
}

inline facet::FactorDescriptor nominal(const std::string& name,
                                       std::vector<std::string> levels) {
  facet::FactorDescriptor d;
  d.name = name;
  d.scale = facet::Scale::Nominal;
  d.levels = std::move(levels);
  return d;
}

inline facet::ProjectRecord record(std::string id, std::vector<facet::Cell> values) {
  facet::ProjectRecord r;
  r.id = std::move(id);
  r.values = std::move(values);
  return r;
}

// n records over `factors` continuous independents plus a dependent that
// tracks f1 + 0.5 f2 with a little noise; ids are r001, r002, ...
inline facet::Dataset correlated_dataset(std::size_t n, std::size_t factors,
                                         std::uint64_t seed, double noise_share = 0.05) {
  std::vector<facet::FactorDescriptor> descriptors;
  for (std::size_t f = 1; f <= factors; ++f)
    descriptors.push_back(continuous("f" + std::to_string(f)));
  descriptors.push_back(continuous("target", facet::Role::Dependent));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(factors));
  std::vector<double> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < factors; ++f) rows[i][f] = unit(rng);
    raw[i] = rows[i][0] + (factors > 1 ? 0.5 * rows[i][1] : 0.0);
  }
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double range = *hi - *lo;
  std::normal_distribution<double> noise(0.0, noise_share * range);

  std::vector<facet::ProjectRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    facet::ProjectRecord r;
    r.id = "r" + std::string(i + 1 < 10 ? "00" : i + 1 < 100 ? "0" : "") + std::to_string(i + 1);
    for (double v : rows[i]) r.values.push_back(facet::Cell::number(v));
    r.values.push_back(facet::Cell::number(10.0 + raw[i] + noise(rng)));
    records.push_back(std::move(r));
  }
  return facet::Dataset(std::move(descriptors), std::move(records));
}

// n records over 4 continuous independents where f1 and f2 track a shared
// latent value (so either is predictable from the other) and f3, f4 are pure
// noise; the dependent follows the latent value.
inline facet::Dataset collinear_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<facet::FactorDescriptor> descriptors{continuous("f1"), continuous("f2"),
                                                   continuous("f3"), continuous("f4"),
                                                   continuous("target", facet::Role::Dependent)};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> wobble(0.0, 0.03);
  std::vector<facet::ProjectRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = unit(rng);
    facet::ProjectRecord r;
    r.id = "c" + std::string(i + 1 < 10 ? "00" : i + 1 < 100 ? "0" : "") + std::to_string(i + 1);
    r.values = {facet::Cell::number(z + wobble(rng)), facet::Cell::number(z + wobble(rng)),
                facet::Cell::number(unit(rng)), facet::Cell::number(unit(rng)),
                facet::Cell::number(10.0 + z)};
    records.push_back(std::move(r));
  }
  return facet::Dataset(std::move(descriptors), std::move(records));
}

}  // namespace testutil
