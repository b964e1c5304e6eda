#include "facet/pipeline.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

#include "csv.hpp"
#include "facet/errors.hpp"
#include "facet/estimators.hpp"

namespace facet {

namespace {

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end())
      throw ValidationError(fmt::format("{}: unknown key '{}'", where, key));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

EstimatorSpec parse_estimator(const nlohmann::json& spec) {
  if (!spec.is_object()) throw ValidationError("manifest: estimator must be an object");
  EstimatorSpec e;
  e.name = spec.at("name").get<std::string>();
  if (e.name == "knn") {
    reject_unknown_keys(spec, {"name", "k"}, "manifest estimator 'knn'");
    if (spec.contains("k")) e.knn_k = spec.at("k").get<std::size_t>();
  } else if (e.name == "osr") {
    reject_unknown_keys(spec, {"name", "bins", "classes", "min_subset"},
                        "manifest estimator 'osr'");
    if (spec.contains("bins")) e.osr.bins = spec.at("bins").get<std::size_t>();
    if (spec.contains("classes")) e.osr.classes = spec.at("classes").get<std::size_t>();
    if (spec.contains("min_subset")) e.osr.min_subset = spec.at("min_subset").get<std::size_t>();
  } else {
    throw ValidationError(fmt::format("manifest: unknown estimator '{}'", e.name));
  }
  return e;
}

std::ofstream open_artifact(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void write_profile_csv(const MissingnessProfile& profile, std::ostream& out) {
  out << "kind,name,missing_ratio\n";
  for (const auto& [name, ratio] : profile.factor_ratios)
    out << "factor," << csv::escape(name) << ',' << csv::format_double(ratio) << '\n';
  for (const auto& [id, ratio] : profile.record_ratios)
    out << "record," << csv::escape(id) << ',' << csv::format_double(ratio) << '\n';
  out << "total,," << csv::format_double(profile.total) << '\n';
}

}  // namespace

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.filename().string(), e.what()));
  }
  if (!spec.is_object()) throw ValidationError("manifest must be a JSON object");
  reject_unknown_keys(spec,
                      {"data", "schema", "experts", "scores", "tree", "data_share", "prune",
                       "impute", "relief", "estimators", "factor_sets", "top_fraction",
                       "fm_r_fraction", "fi", "seed", "jobs"},
                      "manifest");

  const std::filesystem::path base = path.parent_path();
  RunManifest m;
  m.data = resolve(base, spec.at("data").get<std::string>());
  m.schema = resolve(base, spec.at("schema").get<std::string>());
  m.experts = resolve(base, spec.at("experts").get<std::string>());
  if (spec.contains("scores")) m.scores = resolve(base, spec.at("scores").get<std::string>());
  if (spec.contains("tree")) m.tree = resolve(base, spec.at("tree").get<std::string>());
  if (spec.contains("data_share")) m.data_share = spec.at("data_share").get<double>();
  if (spec.contains("prune")) {
    const nlohmann::json& p = spec.at("prune");
    reject_unknown_keys(p, {"factor_threshold", "project_threshold"}, "manifest prune");
    if (p.contains("factor_threshold"))
      m.prune.factor_threshold = p.at("factor_threshold").get<double>();
    if (p.contains("project_threshold"))
      m.prune.project_threshold = p.at("project_threshold").get<double>();
  }
  if (spec.contains("impute")) {
    const nlohmann::json& i = spec.at("impute");
    reject_unknown_keys(i, {"k"}, "manifest impute");
    if (i.contains("k")) m.impute.k = i.at("k").get<std::size_t>();
  }
  if (spec.contains("relief")) {
    const nlohmann::json& r = spec.at("relief");
    reject_unknown_keys(r, {"m", "k", "sigma"}, "manifest relief");
    if (r.contains("m") && !r.at("m").is_null()) m.relief.m = r.at("m").get<std::size_t>();
    if (r.contains("k")) m.relief.k = r.at("k").get<std::size_t>();
    if (r.contains("sigma")) m.relief.sigma = r.at("sigma").get<double>();
  }
  if (spec.contains("estimators")) {
    for (const nlohmann::json& e : spec.at("estimators"))
      m.estimators.push_back(parse_estimator(e));
  } else {
    m.estimators.push_back({"knn", 3, {}});
    m.estimators.push_back({"osr", 3, {}});
  }
  if (spec.contains("factor_sets")) {
    for (const nlohmann::json& s : spec.at("factor_sets"))
      m.factor_sets.push_back(s.get<std::string>());
  } else {
    m.factor_sets = {"FM", "FC", "FM_R", "FM_R10", "FC_E25", "FC_R25", "FC_I25", "FI"};
  }
  if (spec.contains("top_fraction")) m.top_fraction = spec.at("top_fraction").get<double>();
  if (spec.contains("fm_r_fraction")) m.fm_r_fraction = spec.at("fm_r_fraction").get<double>();
  if (spec.contains("fi")) {
    const nlohmann::json& fi = spec.at("fi");
    reject_unknown_keys(fi, {"top_fraction", "min_preference"}, "manifest fi");
    if (fi.contains("top_fraction")) m.fi_fraction = fi.at("top_fraction").get<double>();
    if (fi.contains("min_preference"))
      m.fi_min_preference = fi.at("min_preference").get<double>();
  }
  if (spec.contains("seed")) m.seed = spec.at("seed").get<std::uint64_t>();
  if (spec.contains("jobs")) m.jobs = spec.at("jobs").get<std::size_t>();
  if (m.jobs < 1) throw ValidationError("manifest: jobs must be at least 1");
  return m;
}

std::vector<FactorSet> build_factor_sets(const SelectionInputs& in,
                                         std::span<const std::string> recipes) {
  if (recipes.empty()) throw ValidationError("no factor set recipes requested");

  const FactorSet fm = make_factor_set("FM", in.measured);
  if (fm.factors.empty()) throw ValidationError("no measured independent factors");
  std::vector<std::string> expert_named;
  for (const auto& [factor, score] : in.expert_rank_scores) expert_named.push_back(factor);
  const FactorSet fe = make_factor_set("FE", expert_named);

  auto scored_subset = [](const std::vector<std::pair<std::string, double>>& scored,
                          const FactorSet& members) {
    std::vector<std::pair<std::string, double>> kept;
    for (const auto& entry : scored)
      if (members.contains(entry.first)) kept.push_back(entry);
    return kept;
  };
  std::vector<std::pair<std::string, double>> rank_scores(in.expert_rank_scores.begin(),
                                                          in.expert_rank_scores.end());

  auto fc = [&]() -> FactorSet {
    FactorSet set = set_intersection("FC", fm, fe);
    if (set.factors.empty())
      throw ValidationError("no overlap between expert factors and measured factors");
    return set;
  };
  auto fm_r = [&] { return positive_weight_set(in.weights); };

  std::vector<FactorSet> sets;
  for (const std::string& recipe : recipes) {
    if (recipe == "FM") {
      sets.push_back(fm);
    } else if (recipe == "FE") {
      if (fe.factors.empty()) throw ValidationError("no expert-named factors");
      sets.push_back(fe);
    } else if (recipe == "FC") {
      sets.push_back(fc());
    } else if (recipe == "FM_R") {
      sets.push_back(fm_r());
    } else if (recipe == "FM_R10") {
      sets.push_back(
          top_fraction("FM_R10", scored_subset(in.weights.weights, fm_r()), in.fm_r_fraction));
    } else if (recipe == "FC_E25") {
      sets.push_back(top_fraction("FC_E25", scored_subset(rank_scores, fc()), in.top_fraction));
    } else if (recipe == "FC_R25") {
      sets.push_back(
          top_fraction("FC_R25", scored_subset(in.weights.weights, fc()), in.top_fraction));
    } else if (recipe == "FC_I25") {
      sets.push_back(
          top_fraction("FC_I25", scored_subset(in.preferences.entries, fc()), in.top_fraction));
    } else if (recipe == "FT") {
      sets.push_back(set_union("FT", fm, fe));
    } else if (recipe == "FI") {
      if (in.fi_min_preference) {
        std::vector<std::string> chosen;
        for (const auto& [factor, pref] : in.preferences.entries)
          if (pref >= *in.fi_min_preference) chosen.push_back(factor);
        if (chosen.empty())
          throw ValidationError(fmt::format("no factor reaches the FI preference threshold {}",
                                            *in.fi_min_preference));
        sets.push_back(make_factor_set("FI", std::move(chosen)));
      } else {
        sets.push_back(top_fraction("FI", in.preferences.entries, in.fi_fraction));
      }
    } else {
      throw ValidationError(fmt::format("unknown factor set recipe '{}'", recipe));
    }
  }

  // Set algebra the construction must satisfy, checked on every run.
  auto find = [&](std::string_view label) -> const FactorSet* {
    for (const FactorSet& s : sets)
      if (s.label == label) return &s;
    return nullptr;
  };
  const FactorSet* got_fm = find("FM");
  const FactorSet* got_fc = find("FC");
  const FactorSet* got_fmr = find("FM_R");
  auto require_subset = [](const FactorSet& a, const FactorSet& b) {
    if (!a.subset_of(b))
      throw Error(fmt::format("set invariant violated: {} is not a subset of {}", a.label,
                              b.label));
  };
  if (got_fmr && got_fm) require_subset(*got_fmr, *got_fm);
  if (const FactorSet* s = find("FM_R10"); s && got_fmr) require_subset(*s, *got_fmr);
  if (got_fc && got_fm) require_subset(*got_fc, *got_fm);
  for (const char* label : {"FC_E25", "FC_R25", "FC_I25"})
    if (const FactorSet* s = find(label); s && got_fc) require_subset(*s, *got_fc);
  if (const FactorSet* ft = find("FT"); ft && got_fm) require_subset(*got_fm, *ft);
  return sets;
}

PipelineResult run_pipeline(const RunManifest& manifest,
                            const std::filesystem::path& output_dir) {
  auto loaded = stage("load", [&] { return load_dataset(manifest.data, manifest.schema); });
  const MissingnessProfile before = profile_missingness(loaded);

  auto pruned = stage("prune", [&] { return prune_missing(loaded, manifest.prune); });
  const MissingnessProfile after = profile_missingness(pruned);
  const std::size_t factors_dropped =
      loaded.descriptors().size() - pruned.descriptors().size();
  const std::size_t records_dropped = loaded.records().size() - pruned.records().size();

  auto imputed =
      stage("impute", [&] { return knn_impute(pruned, manifest.impute, manifest.seed); });

  auto weights =
      stage("weigh", [&] { return rrelieff(imputed, manifest.relief, manifest.seed); });

  auto rank_scores = stage("experts", [&] {
    return aggregate_expert_scores(load_rankings_csv(manifest.experts));
  });
  auto criteria = stage("experts", [&]() -> std::map<std::string, MeanCriteria> {
    if (manifest.scores.empty()) return {};
    return mean_criterion_scores(load_scores_csv(manifest.scores));
  });

  struct Integrated {
    McdaNode tree;
    PreferenceRanking ranking;
  };
  auto integrated = stage("integrate", [&]() -> Integrated {
    DefaultTree built = build_default_tree(weights, criteria, manifest.data_share);
    McdaNode tree =
        manifest.tree.empty() ? std::move(built.tree) : load_tree_json(manifest.tree);
    // Alternatives carry the expert rank score too so custom trees can bind it.
    std::set<std::string> universe;
    for (const Alternative& a : built.alternatives) universe.insert(a.name);
    for (const auto& [factor, score] : rank_scores) universe.insert(factor);
    std::vector<Alternative> alternatives;
    for (const std::string& factor : universe) {
      Alternative a;
      a.name = factor;
      double w = 0.0;
      for (const auto& [name, value] : weights.weights)
        if (name == factor) w = value;
      MeanCriteria c;
      if (auto it = criteria.find(factor); it != criteria.end()) c = it->second;
      double rank_score = 0.0;
      if (auto it = rank_scores.find(factor); it != rank_scores.end()) rank_score = it->second;
      a.metrics["rrf_weight"] = w;
      a.metrics["expert_impact"] = c.impact;
      a.metrics["expert_difficulty"] = c.difficulty;
      a.metrics["expert_controllability"] = c.controllability;
      a.metrics["expert_rank_score"] = rank_score;
      alternatives.push_back(std::move(a));
    }
    PreferenceRanking ranking = rank_alternatives(tree, alternatives);
    return Integrated{std::move(tree), std::move(ranking)};
  });

  auto sets = stage("select", [&] {
    SelectionInputs in;
    for (std::size_t c : imputed.independent_columns())
      in.measured.push_back(imputed.descriptors()[c].name);
    in.weights = weights;
    in.expert_rank_scores = rank_scores;
    in.preferences = integrated.ranking;
    in.top_fraction = manifest.top_fraction;
    in.fm_r_fraction = manifest.fm_r_fraction;
    in.fi_fraction = manifest.fi_fraction;
    in.fi_min_preference = manifest.fi_min_preference;
    return build_factor_sets(in, manifest.factor_sets);
  });

  auto report = stage("evaluate", [&] {
    return compare_factor_sets(imputed, manifest.estimators, sets, manifest.jobs);
  });

  stage("write", [&] {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    {
      auto out = open_artifact(output_dir / "profile.csv");
      write_profile_csv(before, out);
    }
    {
      auto out = open_artifact(output_dir / "pruned.csv");
      write_dataset_csv(pruned, out);
    }
    {
      auto out = open_artifact(output_dir / "imputed.csv");
      write_dataset_csv(imputed, out);
    }
    {
      auto out = open_artifact(output_dir / "weights.csv");
      write_weights_csv(weights, out);
    }
    {
      auto out = open_artifact(output_dir / "expert_scores.csv");
      out << "factor,rank_score,mean_impact,mean_difficulty,mean_controllability\n";
      for (const auto& [factor, score] : rank_scores) {
        MeanCriteria c;
        if (auto it = criteria.find(factor); it != criteria.end()) c = it->second;
        out << csv::escape(factor) << ',' << csv::format_double(score) << ','
            << csv::format_double(c.impact) << ',' << csv::format_double(c.difficulty) << ','
            << csv::format_double(c.controllability) << '\n';
      }
    }
    {
      auto out = open_artifact(output_dir / "tree.json");
      write_tree_json(integrated.tree, out);
    }
    {
      auto out = open_artifact(output_dir / "ranking.csv");
      write_ranking_csv(integrated.ranking, out);
    }
    fs::create_directories(output_dir / "sets");
    nlohmann::ordered_json sets_json;
    for (const FactorSet& set : sets) {
      auto out = open_artifact(output_dir / "sets" / (set.label + ".txt"));
      for (const std::string& factor : set.factors) out << factor << '\n';
      sets_json[set.label] = set.factors;
    }
    {
      auto out = open_artifact(output_dir / "sets.json");
      out << sets_json.dump(2) << '\n';
    }
    {
      auto out = open_artifact(output_dir / "report.csv");
      write_report_csv(report, out);
    }
    {
      auto out = open_artifact(output_dir / "report.json");
      write_report_json(report, out);
    }
    for (const EstimatorSpec& spec : manifest.estimators) {
      if (spec.name != "osr") continue;
      const std::size_t dep = imputed.require_dependent();
      for (const FactorSet& set : sets) {
        FactorSet active = set;
        {
          std::vector<std::string> measured;
          for (std::size_t c : imputed.independent_columns())
            measured.push_back(imputed.descriptors()[c].name);
          active = set_intersection(set.label, set,
                                    make_factor_set(set.label, std::move(measured)));
        }
        fs::create_directories(output_dir / "trace" / set.label);
        for (std::size_t i = 0; i < imputed.records().size(); ++i) {
          const ProjectRecord& record = imputed.records()[i];
          const Cell& dep_cell = record.values[dep];
          if (dep_cell.is_missing() || dep_cell.number() <= 0.0) continue;
          std::vector<ProjectRecord> train_records;
          for (std::size_t j = 0; j < imputed.records().size(); ++j)
            if (j != i) train_records.push_back(imputed.records()[j]);
          Dataset train(imputed.descriptors(), std::move(train_records));
          EstimationQuery q;
          q.record = record;
          q.record.values[dep] = Cell::missing();
          q.active = active;
          const auto [prediction, trace] = osr_estimate(train, q, spec.osr);
          auto out =
              open_artifact(output_dir / "trace" / set.label / (record.id + ".json"));
          write_trace_json(trace, out);
        }
      }
    }
    {
      nlohmann::ordered_json run;
      run["seed"] = manifest.seed;
      run["data_share"] = manifest.data_share;
      run["prune"] = {{"factor_threshold", manifest.prune.factor_threshold},
                      {"project_threshold", manifest.prune.project_threshold}};
      run["impute"] = {{"k", manifest.impute.k}};
      run["relief"] = {{"m", weights.m}, {"k", weights.k}, {"sigma", weights.sigma}};
      run["factors_dropped"] = factors_dropped;
      run["records_dropped"] = records_dropped;
      run["missing_before"] = before.total;
      run["missing_after"] = after.total;
      run["excluded_records"] = report.excluded_records;
      run["constant_dependent"] = weights.constant_dependent;
      auto out = open_artifact(output_dir / "run.json");
      out << run.dump(2) << '\n';
    }
    return 0;
  });

  return PipelineResult{before,
                        after,
                        factors_dropped,
                        records_dropped,
                        std::move(imputed),
                        std::move(weights),
                        std::move(rank_scores),
                        std::move(criteria),
                        std::move(integrated.tree),
                        std::move(integrated.ranking),
                        std::move(sets),
                        std::move(report)};
}

}  // namespace facet
