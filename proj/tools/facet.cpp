#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "facet/errors.hpp"
#include "facet/estimators.hpp"
#include "facet/evaluation.hpp"
#include "facet/expert.hpp"
#include "facet/factor_set.hpp"
#include "facet/impute.hpp"
#include "facet/mcda.hpp"
#include "facet/pipeline.hpp"
#include "facet/relief.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string data;
  std::string schema;
  std::string experts;
  std::string scores;
  std::string tree;
  std::string manifest;
  std::string query;
  std::string output_dir = "facet-out";
  bool output_dir_set = false;
  std::size_t k = 0;
  bool k_set = false;
  std::size_t m = 0;
  bool m_set = false;
  double sigma = 20.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t jobs = 1;
  bool jobs_set = false;
  double factor_thresh = 0.90;
  double project_thresh = 0.55;
  double top_fraction = 0.25;
  double data_share = 0.5;
};

std::string percent(double ratio) { return fmt::format("{:.1f}%", 100.0 * ratio); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw facet::Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

fs::path ensure_output_dir(const Options& opt) {
  fs::create_directories(opt.output_dir);
  return opt.output_dir;
}

facet::Dataset load(const Options& opt) {
  return facet::load_dataset(opt.data, opt.schema);
}

facet::ReliefConfig relief_config(const Options& opt) {
  facet::ReliefConfig cfg;
  if (opt.m_set) cfg.m = opt.m;
  if (opt.k_set) cfg.k = opt.k;
  cfg.sigma = opt.sigma;
  return cfg;
}

void cmd_profile(const Options& opt) {
  const facet::Dataset ds = load(opt);
  const facet::MissingnessProfile profile = facet::profile_missingness(ds);
  fmt::print("{:<28}  {}\n", "factor", "missing");
  for (const auto& [name, ratio] : profile.factor_ratios)
    fmt::print("{:<28}  {:>7}\n", name, percent(ratio));
  fmt::print("\n{:<28}  {}\n", "record", "missing");
  for (const auto& [id, ratio] : profile.record_ratios)
    fmt::print("{:<28}  {:>7}\n", id, percent(ratio));
  fmt::print("\ntotal missing: {}\n", percent(profile.total));
  if (opt.output_dir_set) {
    const fs::path dir = ensure_output_dir(opt);
    auto out = open_out(dir / "profile.csv");
    out << "kind,name,missing_ratio\n";
    for (const auto& [name, ratio] : profile.factor_ratios)
      out << "factor," << name << ',' << ratio << '\n';
    for (const auto& [id, ratio] : profile.record_ratios)
      out << "record," << id << ',' << ratio << '\n';
    out << "total,," << profile.total << '\n';
    fmt::print("wrote {}\n", (dir / "profile.csv").string());
  }
}

void cmd_prune(const Options& opt) {
  const facet::Dataset ds = load(opt);
  const facet::PruneConfig cfg{opt.factor_thresh, opt.project_thresh};
  const facet::Dataset pruned = facet::prune_missing(ds, cfg);

  std::set<std::string> kept_factors;
  for (const auto& d : pruned.descriptors()) kept_factors.insert(d.name);
  std::set<std::string> kept_records;
  for (const auto& r : pruned.records()) kept_records.insert(r.id);
  for (const auto& d : ds.descriptors())
    if (!kept_factors.contains(d.name)) fmt::print("dropped factor {}\n", d.name);
  for (const auto& r : ds.records())
    if (!kept_records.contains(r.id)) fmt::print("dropped record {}\n", r.id);
  fmt::print("factors {} -> {}, records {} -> {}\n", ds.descriptors().size(),
             pruned.descriptors().size(), ds.records().size(), pruned.records().size());
  fmt::print("total missing {} -> {}\n", percent(facet::profile_missingness(ds).total),
             percent(facet::profile_missingness(pruned).total));

  const fs::path dir = ensure_output_dir(opt);
  facet::write_dataset_csv(pruned, dir / "pruned.csv");
  fmt::print("wrote {}\n", (dir / "pruned.csv").string());
}

void cmd_impute(const Options& opt) {
  const facet::Dataset ds = load(opt);
  facet::ImputationConfig cfg;
  if (opt.k_set) cfg.k = opt.k;
  const facet::Dataset imputed = facet::knn_impute(ds, cfg, opt.seed);

  std::size_t filled = 0;
  for (std::size_t i = 0; i < ds.records().size(); ++i)
    for (std::size_t c : ds.independent_columns())
      if (ds.records()[i].values[c].is_missing() &&
          !imputed.records()[i].values[c].is_missing())
        ++filled;
  fmt::print("imputed {} cell(s) with k={}\n", filled, cfg.k);

  const fs::path dir = ensure_output_dir(opt);
  facet::write_dataset_csv(imputed, dir / "imputed.csv");
  fmt::print("wrote {}\n", (dir / "imputed.csv").string());
}

void cmd_weigh(const Options& opt) {
  const facet::Dataset ds = load(opt);
  const facet::WeightVector wv = facet::rrelieff(ds, relief_config(opt), opt.seed);
  if (wv.constant_dependent)
    std::cerr << "warning: the dependent variable is constant; every weight is 0\n";

  std::vector<std::pair<std::string, double>> rows = wv.weights;
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  fmt::print("{:<28}  {:>10}  {}\n", "factor", "weight", "rank");
  for (std::size_t i = 0; i < rows.size(); ++i)
    fmt::print("{:<28}  {:>10.4f}  {}\n", rows[i].first, rows[i].second, i + 1);

  const fs::path dir = ensure_output_dir(opt);
  auto out = open_out(dir / "weights.csv");
  facet::write_weights_csv(wv, out);
  fmt::print("wrote {}\n", (dir / "weights.csv").string());
}

// Concordance among the experts of one category: factors anyone ranked become
// the objects, and every factor an expert left unranked shares the midrank of
// the remaining positions.
void category_concordance(const facet::ExpertRankingSet& rankings) {
  for (const std::string& category : rankings.categories()) {
    std::set<std::string> object_set;
    std::set<std::string> expert_set;
    for (const facet::RankingEntry& e : rankings.entries())
      if (e.category == category) {
        object_set.insert(e.factor);
        expert_set.insert(e.expert);
      }
    const std::vector<std::string> objects(object_set.begin(), object_set.end());
    if (expert_set.size() < 2 || objects.size() < 3) {
      fmt::print("category {:<12}  concordance not computable (needs >=2 experts, >=3 factors)\n",
                 category);
      continue;
    }
    std::vector<std::vector<double>> matrix;
    for (const std::string& expert : expert_set) {
      std::map<std::string, int> ranked;
      for (const facet::RankingEntry& e : rankings.entries())
        if (e.category == category && e.expert == expert) ranked[e.factor] = e.rank;
      const double unranked_midrank =
          (static_cast<double>(ranked.size()) + 1.0 + static_cast<double>(objects.size())) / 2.0;
      std::vector<double> row;
      row.reserve(objects.size());
      for (const std::string& factor : objects) {
        auto it = ranked.find(factor);
        row.push_back(it == ranked.end() ? unranked_midrank : it->second);
      }
      matrix.push_back(std::move(row));
    }
    const facet::ConcordanceResult w = facet::kendall_w(matrix);
    fmt::print("category {:<12}  W = {:.3f}  chi2({}) = {:.3f}  p = {:.3f}\n", category, w.w,
               w.df, w.chi_squared, w.p_value);
  }
}

void cmd_experts(const Options& opt) {
  const facet::ExpertRankingSet rankings = facet::load_rankings_csv(opt.experts);
  const std::map<std::string, double> scores = facet::aggregate_expert_scores(rankings);
  std::map<std::string, facet::MeanCriteria> criteria;
  if (!opt.scores.empty())
    criteria = facet::mean_criterion_scores(facet::load_scores_csv(opt.scores));

  fmt::print("{:<28}  {:>10}\n", "factor", "rank score");
  std::vector<std::pair<std::string, double>> rows(scores.begin(), scores.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [factor, score] : rows) fmt::print("{:<28}  {:>10.4f}\n", factor, score);
  fmt::print("\n");
  category_concordance(rankings);

  if (opt.output_dir_set) {
    const fs::path dir = ensure_output_dir(opt);
    auto out = open_out(dir / "expert_scores.csv");
    out << "factor,rank_score,mean_impact,mean_difficulty,mean_controllability\n";
    for (const auto& [factor, score] : scores) {
      facet::MeanCriteria c;
      if (auto it = criteria.find(factor); it != criteria.end()) c = it->second;
      out << factor << ',' << score << ',' << c.impact << ',' << c.difficulty << ','
          << c.controllability << '\n';
    }
    fmt::print("wrote {}\n", (dir / "expert_scores.csv").string());
  }
}

struct Integration {
  facet::WeightVector weights;
  std::map<std::string, double> rank_scores;
  std::map<std::string, facet::MeanCriteria> criteria;
  facet::McdaNode tree;
  facet::PreferenceRanking ranking;
};

Integration integrate(const Options& opt, const facet::ReliefConfig& relief) {
  const facet::Dataset ds = load(opt);
  Integration result;
  result.weights = facet::rrelieff(ds, relief, opt.seed);
  if (result.weights.constant_dependent)
    std::cerr << "warning: the dependent variable is constant; every weight is 0\n";
  const facet::ExpertRankingSet rankings = facet::load_rankings_csv(opt.experts);
  result.rank_scores = facet::aggregate_expert_scores(rankings);
  if (!opt.scores.empty())
    result.criteria = facet::mean_criterion_scores(facet::load_scores_csv(opt.scores));

  facet::DefaultTree built =
      facet::build_default_tree(result.weights, result.criteria, opt.data_share);
  result.tree = opt.tree.empty() ? std::move(built.tree) : facet::load_tree_json(opt.tree);

  std::set<std::string> universe;
  for (const facet::Alternative& a : built.alternatives) universe.insert(a.name);
  for (const auto& [factor, score] : result.rank_scores) universe.insert(factor);
  std::vector<facet::Alternative> alternatives;
  for (const std::string& factor : universe) {
    facet::Alternative a;
    a.name = factor;
    double w = 0.0;
    for (const auto& [name, value] : result.weights.weights)
      if (name == factor) w = value;
    facet::MeanCriteria c;
    if (auto it = result.criteria.find(factor); it != result.criteria.end()) c = it->second;
    double rank_score = 0.0;
    if (auto it = result.rank_scores.find(factor); it != result.rank_scores.end())
      rank_score = it->second;
    a.metrics["rrf_weight"] = w;
    a.metrics["expert_impact"] = c.impact;
    a.metrics["expert_difficulty"] = c.difficulty;
    a.metrics["expert_controllability"] = c.controllability;
    a.metrics["expert_rank_score"] = rank_score;
    alternatives.push_back(std::move(a));
  }
  result.ranking = facet::rank_alternatives(result.tree, alternatives);
  return result;
}

void cmd_integrate(const Options& opt) {
  const Integration integration = integrate(opt, relief_config(opt));
  fmt::print("{:<28}  {:>10}  {}\n", "factor", "preference", "rank");
  for (std::size_t i = 0; i < integration.ranking.entries.size(); ++i)
    fmt::print("{:<28}  {:>10.4f}  {}\n", integration.ranking.entries[i].first,
               integration.ranking.entries[i].second, i + 1);

  const fs::path dir = ensure_output_dir(opt);
  auto out = open_out(dir / "ranking.csv");
  facet::write_ranking_csv(integration.ranking, out);
  fmt::print("wrote {}\n", (dir / "ranking.csv").string());
}

void cmd_select(const Options& opt) {
  const facet::Dataset ds = load(opt);
  const Integration integration = integrate(opt, relief_config(opt));

  facet::SelectionInputs in;
  for (std::size_t c : ds.independent_columns()) in.measured.push_back(ds.descriptors()[c].name);
  in.weights = integration.weights;
  in.expert_rank_scores = integration.rank_scores;
  in.preferences = integration.ranking;
  in.top_fraction = opt.top_fraction;
  in.fi_fraction = opt.top_fraction;
  const std::vector<std::string> recipes = {"FM",     "FE",     "FC",     "FM_R",  "FM_R10",
                                            "FC_E25", "FC_R25", "FC_I25", "FT",    "FI"};
  const std::vector<facet::FactorSet> sets = facet::build_factor_sets(in, recipes);

  const fs::path dir = ensure_output_dir(opt);
  fs::create_directories(dir / "sets");
  for (const facet::FactorSet& set : sets) {
    fmt::print("{:<8}  {} factor(s)\n", set.label, set.factors.size());
    auto out = open_out(dir / "sets" / (set.label + ".txt"));
    for (const std::string& factor : set.factors) out << factor << '\n';
  }
  fmt::print("wrote {}\n", (dir / "sets").string());
}

void cmd_estimate(const Options& opt) {
  const facet::Dataset ds = load(opt);
  const facet::Dataset query_ds = facet::load_dataset(opt.query, opt.schema);
  if (query_ds.records().size() != 1)
    throw facet::ValidationError(
        fmt::format("query file must hold exactly 1 record, got {}", query_ds.records().size()));

  std::vector<std::string> active;
  for (std::size_t c : ds.independent_columns()) active.push_back(ds.descriptors()[c].name);
  facet::EstimationQuery q;
  q.record = query_ds.records().front();
  q.active = facet::make_factor_set("FM", std::move(active));

  const std::size_t k = opt.k_set ? opt.k : 3;
  const double knn_prediction = facet::knn_estimate(ds, q, k);
  const auto [osr_prediction, trace] = facet::osr_estimate(ds, q, facet::OsrConfig{});
  fmt::print("k-NN (k={}): {:.4f}\n", k, knn_prediction);
  fmt::print("OSR: {:.4f} via {} predicate(s)\n", osr_prediction, trace.predicates.size());
  for (const facet::OsrPredicate& p : trace.predicates) fmt::print("  {}\n", p.description);

  if (opt.output_dir_set) {
    const fs::path dir = ensure_output_dir(opt);
    auto out = open_out(dir / "trace.json");
    facet::write_trace_json(trace, out);
    fmt::print("wrote {}\n", (dir / "trace.json").string());
  }
}

void cmd_evaluate(const Options& opt) {
  const facet::Dataset ds = load(opt);

  facet::SelectionInputs in;
  for (std::size_t c : ds.independent_columns()) in.measured.push_back(ds.descriptors()[c].name);
  in.top_fraction = opt.top_fraction;
  in.fi_fraction = opt.top_fraction;
  std::vector<std::string> recipes = {"FM", "FM_R", "FM_R10"};
  if (!opt.experts.empty()) {
    const Integration integration = integrate(opt, facet::ReliefConfig{});
    in.weights = integration.weights;
    in.expert_rank_scores = integration.rank_scores;
    in.preferences = integration.ranking;
    recipes = {"FM", "FC", "FM_R", "FM_R10", "FC_E25", "FC_R25", "FC_I25", "FI"};
  } else {
    in.weights = facet::rrelieff(ds, facet::ReliefConfig{}, opt.seed);
    if (in.weights.constant_dependent)
      std::cerr << "warning: the dependent variable is constant; every weight is 0\n";
  }
  const std::vector<facet::FactorSet> sets = facet::build_factor_sets(in, recipes);

  std::vector<facet::EstimatorSpec> estimators;
  estimators.push_back({"knn", opt.k_set ? opt.k : 3, {}});
  estimators.push_back({"osr", 3, {}});
  const facet::EvaluationReport report =
      facet::compare_factor_sets(ds, estimators, sets, opt.jobs);
  facet::write_report_table(report, std::cout);

  const fs::path dir = ensure_output_dir(opt);
  {
    auto out = open_out(dir / "report.csv");
    facet::write_report_csv(report, out);
  }
  {
    auto out = open_out(dir / "report.json");
    facet::write_report_json(report, out);
  }
  fmt::print("wrote {} and {}\n", (dir / "report.csv").string(),
             (dir / "report.json").string());
}

void cmd_run(const Options& opt) {
  facet::RunManifest manifest = facet::load_manifest(opt.manifest);
  if (opt.seed_set) manifest.seed = opt.seed;
  if (opt.jobs_set) manifest.jobs = opt.jobs;
  const facet::PipelineResult result = facet::run_pipeline(manifest, opt.output_dir);

  fmt::print("missing {} -> {} after dropping {} factor(s) and {} record(s)\n",
             percent(result.profile_before.total), percent(result.profile_after.total),
             result.factors_dropped, result.records_dropped);
  if (result.weights.constant_dependent)
    std::cerr << "warning: the dependent variable is constant; every weight is 0\n";
  fmt::print("integrated ranking of {} factor(s), {} factor set(s)\n",
             result.ranking.entries.size(), result.sets.size());
  facet::write_report_table(result.report, std::cout);
  fmt::print("artifacts under {}\n", opt.output_dir);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Productivity factor selection and estimation toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "Seed for every randomized step")
        ->each([&](const std::string&) { opt.seed_set = true; });
    cmd->add_option("--output-dir", opt.output_dir, "Directory for generated files")
        ->each([&](const std::string&) { opt.output_dir_set = true; });
  };
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", opt.data, "Project data CSV")->required();
    cmd->add_option("--schema", opt.schema, "Column schema JSON")->required();
  };
  auto add_k = [&](CLI::App* cmd, const char* help) {
    cmd->add_option("--k", opt.k, help)->each([&](const std::string&) { opt.k_set = true; });
  };

  CLI::App* profile = app.add_subcommand("profile", "Report missing-data ratios");
  add_data(profile);
  add_common(profile);

  CLI::App* prune = app.add_subcommand("prune", "Drop sparsely measured factors, then records");
  add_data(prune);
  add_common(prune);
  prune->add_option("--factor-thresh", opt.factor_thresh,
                    "Drop factors missing at least this ratio");
  prune->add_option("--project-thresh", opt.project_thresh,
                    "Drop records missing more than this ratio");

  CLI::App* impute = app.add_subcommand("impute", "Fill missing cells from nearest donors");
  add_data(impute);
  add_common(impute);
  add_k(impute, "Donor count (default 5)");

  CLI::App* weigh = app.add_subcommand("weigh", "Weight factors with regression ReliefF");
  add_data(weigh);
  add_common(weigh);
  add_k(weigh, "Neighbors per instance (default 10)");
  weigh->add_option("--m", opt.m, "Instance iterations (default: one full sweep)")
      ->each([&](const std::string&) { opt.m_set = true; });
  weigh->add_option("--sigma", opt.sigma, "Rank-exponential decay (default 20)");

  CLI::App* experts = app.add_subcommand("experts", "Aggregate expert rankings and concordance");
  add_common(experts);
  experts->add_option("--experts", opt.experts, "Expert rankings CSV")->required();
  experts->add_option("--scores", opt.scores, "Criterion scores CSV");

  CLI::App* integrate_cmd =
      app.add_subcommand("integrate", "Rank factors through the decision hierarchy");
  add_data(integrate_cmd);
  add_common(integrate_cmd);
  integrate_cmd->add_option("--experts", opt.experts, "Expert rankings CSV")->required();
  integrate_cmd->add_option("--scores", opt.scores, "Criterion scores CSV");
  integrate_cmd->add_option("--tree", opt.tree, "Custom decision tree JSON");
  integrate_cmd->add_option("--data-share", opt.data_share,
                            "Weight of the data-evidence branch (default 0.5)");
  add_k(integrate_cmd, "ReliefF neighbors (default 10)");
  integrate_cmd->add_option("--m", opt.m, "ReliefF iterations (default: full sweep)")
      ->each([&](const std::string&) { opt.m_set = true; });
  integrate_cmd->add_option("--sigma", opt.sigma, "ReliefF decay (default 20)");

  CLI::App* select = app.add_subcommand("select", "Build the named factor sets");
  add_data(select);
  add_common(select);
  select->add_option("--experts", opt.experts, "Expert rankings CSV")->required();
  select->add_option("--scores", opt.scores, "Criterion scores CSV");
  select->add_option("--tree", opt.tree, "Custom decision tree JSON");
  select->add_option("--data-share", opt.data_share, "Data-evidence branch weight");
  select->add_option("--top-fraction", opt.top_fraction, "Fraction kept by the *25 and FI cuts");
  add_k(select, "ReliefF neighbors (default 10)");

  CLI::App* estimate = app.add_subcommand("estimate", "Estimate one project from analogies");
  add_data(estimate);
  add_common(estimate);
  estimate->add_option("query", opt.query, "Single-record query CSV")->required();
  add_k(estimate, "Analogies for k-NN (default 3)");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Cross-validate estimators per factor set");
  add_data(evaluate);
  add_common(evaluate);
  evaluate->add_option("--experts", opt.experts, "Expert rankings CSV");
  evaluate->add_option("--scores", opt.scores, "Criterion scores CSV");
  evaluate->add_option("--top-fraction", opt.top_fraction, "Fraction kept by the *25 cuts");
  evaluate->add_option("--data-share", opt.data_share, "Data-evidence branch weight");
  add_k(evaluate, "Analogies for k-NN (default 3)");
  evaluate->add_option("--jobs", opt.jobs, "Concurrent cross-validation folds")
      ->each([&](const std::string&) { opt.jobs_set = true; });

  CLI::App* run = app.add_subcommand("run", "Execute the full pipeline from a manifest");
  add_common(run);
  run->add_option("--manifest", opt.manifest, "Run manifest JSON")->required();
  run->add_option("--jobs", opt.jobs, "Concurrent cross-validation folds")
      ->each([&](const std::string&) { opt.jobs_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    std::cerr << e.what() << '\n' << app.help() << '\n';
    return 1;
  }

  try {
    if (profile->parsed()) cmd_profile(opt);
    if (prune->parsed()) cmd_prune(opt);
    if (impute->parsed()) cmd_impute(opt);
    if (weigh->parsed()) cmd_weigh(opt);
    if (experts->parsed()) cmd_experts(opt);
    if (integrate_cmd->parsed()) cmd_integrate(opt);
    if (select->parsed()) cmd_select(opt);
    if (estimate->parsed()) cmd_estimate(opt);
    if (evaluate->parsed()) cmd_evaluate(opt);
    if (run->parsed()) cmd_run(opt);
  } catch (const facet::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const facet::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
