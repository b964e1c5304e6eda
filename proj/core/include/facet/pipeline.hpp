#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "facet/dataset.hpp"
#include "facet/evaluation.hpp"
#include "facet/expert.hpp"
#include "facet/factor_set.hpp"
#include "facet/impute.hpp"
#include "facet/mcda.hpp"
#include "facet/relief.hpp"

namespace facet {

struct RunManifest {
  std::filesystem::path data;
  std::filesystem::path schema;
  std::filesystem::path experts;
  std::filesystem::path scores;  // optional, empty when absent
  std::filesystem::path tree;    // optional custom tree, empty = default tree
  double data_share = 0.5;
  PruneConfig prune;
  ImputationConfig impute;
  ReliefConfig relief;
  std::vector<EstimatorSpec> estimators;
  std::vector<std::string> factor_sets;
  double top_fraction = 0.25;    // FC_E25 / FC_R25 / FC_I25 cut
  double fm_r_fraction = 0.10;   // FM_R10 cut
  double fi_fraction = 0.25;     // FI cut over the integrated ranking
  std::optional<double> fi_min_preference;  // threshold cut instead of the fraction
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Reads the JSON manifest; relative paths resolve against its directory.
RunManifest load_manifest(const std::filesystem::path& path);

struct SelectionInputs {
  std::vector<std::string> measured;                 // FM universe
  WeightVector weights;                              // over the measured factors
  std::map<std::string, double> expert_rank_scores;  // FE universe with scores
  PreferenceRanking preferences;                     // integrated ranking
  double top_fraction = 0.25;
  double fm_r_fraction = 0.10;
  double fi_fraction = 0.25;
  std::optional<double> fi_min_preference;
};

// Builds the requested factor sets (FM, FE, FC, FM_R, FM_R10, FC_E25, FC_R25,
// FC_I25, FT, FI) and asserts the set-algebra relations between them.
std::vector<FactorSet> build_factor_sets(const SelectionInputs& in,
                                         std::span<const std::string> recipes);

struct PipelineResult {
  MissingnessProfile profile_before;
  MissingnessProfile profile_after;
  std::size_t factors_dropped = 0;
  std::size_t records_dropped = 0;
  Dataset imputed;
  WeightVector weights;
  std::map<std::string, double> expert_rank_scores;
  std::map<std::string, MeanCriteria> criteria;
  McdaNode tree;
  PreferenceRanking ranking;
  std::vector<FactorSet> sets;
  EvaluationReport report;
};

// Runs prune -> impute -> weighting -> expert aggregation -> integration ->
// factor sets -> evaluation and writes every artifact (weights.csv,
// ranking.csv, report.csv, report.json, trace/, ...) under output_dir. A rerun
// with the same manifest reproduces the files byte for byte.
PipelineResult run_pipeline(const RunManifest& manifest,
                            const std::filesystem::path& output_dir);

}  // namespace facet
