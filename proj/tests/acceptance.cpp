// Acceptance gate for the toolkit: nine end-to-end criteria, one [PASS]/[FAIL]
// line each, nonzero exit when anything fails. Reference values come from the
// independent implementations in oracles.cpp, never from the library itself.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facet/dataset.hpp"
#include "facet/estimators.hpp"
#include "facet/evaluation.hpp"
#include "facet/expert.hpp"
#include "facet/factor_set.hpp"
#include "facet/impute.hpp"
#include "facet/mcda.hpp"
#include "facet/pipeline.hpp"
#include "facet/relief.hpp"
#include "facet/stats.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "tree_gen.hpp"

namespace fs = std::filesystem;

namespace {

constexpr double kTolExact = 1e-12;  // analytic identities
constexpr double kTolLoose = 1e-9;   // accumulated floating point

class Checks {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void close(double got, double want, double tol, const std::string& what) {
    if (!(std::fabs(got - want) <= tol))
      failures_.push_back(what + ": expected " + str(want) + ", got " + str(got));
  }
  const std::vector<std::string>& failures() const { return failures_; }

  static std::string str(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
  }

 private:
  std::vector<std::string> failures_;
};

std::vector<double> query_values(const facet::Dataset& ds, const facet::ProjectRecord& r,
                                 const facet::FactorSet& active) {
  std::vector<double> out;
  for (const std::string& name : active.factors) {
    const facet::Cell& cell = r.values[ds.require_column(name)];
    out.push_back(cell.is_level() ? static_cast<double>(cell.level()) : cell.number());
  }
  return out;
}

facet::FactorSet all_independents(const facet::Dataset& ds) {
  std::vector<std::string> names;
  for (std::size_t c : ds.independent_columns()) names.push_back(ds.descriptors()[c].name);
  return facet::make_factor_set("FM", std::move(names));
}

facet::Dataset with_extra(const facet::Dataset& ds, facet::FactorDescriptor d,
                          const std::function<facet::Cell(std::size_t)>& cell) {
  std::vector<facet::FactorDescriptor> descriptors = ds.descriptors();
  descriptors.push_back(std::move(d));
  std::vector<facet::ProjectRecord> records = ds.records();
  for (std::size_t i = 0; i < records.size(); ++i) records[i].values.push_back(cell(i));
  return facet::Dataset(std::move(descriptors), std::move(records));
}

std::string dataset_text(const facet::Dataset& ds) {
  std::ostringstream out;
  facet::write_dataset_csv(ds, out);
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + FACET_CLI_PATH + "' " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file())
      files[fs::relative(entry.path(), root).generic_string()] = testutil::slurp(entry.path());
  return files;
}

// ---- criterion bodies ------------------------------------------------------

void metric_exactness(Checks& c) {
  std::vector<facet::EstimateRecord> records;
  for (double m : {0.1, 0.2, 0.4, 0.8}) records.push_back({"p", 1.0, 1.0, m});
  const facet::MetricsSummary s = facet::summarize(records);
  c.close(s.mmre, 0.375, kTolExact, "MMRE of {0.1,0.2,0.4,0.8}");
  c.close(s.mdmre, 0.3, kTolExact, "MdMRE of {0.1,0.2,0.4,0.8}");
  c.close(s.pred25, 0.5, kTolExact, "Pred(25) of {0.1,0.2,0.4,0.8}");
  c.require(facet::mre(100.0, 75.0) == 0.25, "mre(100,75) must be exactly 0.25");
}

void loocv_oracle_equivalence(Checks& c) {
  const facet::Dataset raw =
      facet::load_dataset(testutil::data_file("synthetic.csv"),
                          testutil::data_file("synthetic.schema.json"));
  const facet::Dataset ds = facet::knn_impute(raw, {.k = 3}, 17);
  const facet::FactorSet fm = all_independents(ds);
  const std::size_t dep = ds.require_dependent();

  for (std::size_t held = 0; held < ds.records().size(); ++held) {
    std::vector<facet::ProjectRecord> rest;
    for (std::size_t i = 0; i < ds.records().size(); ++i)
      if (i != held) rest.push_back(ds.records()[i]);
    const facet::Dataset train(ds.descriptors(), std::move(rest));

    facet::EstimationQuery q;
    q.record = ds.records()[held];
    q.record.values[dep] = facet::Cell::missing();
    q.active = fm;

    const oracle::Frame frame = oracle::from_dataset(train);
    const std::vector<double> qv = query_values(ds, ds.records()[held], fm);
    const std::string id = ds.records()[held].id;
    for (std::size_t k : {std::size_t{1}, std::size_t{3}}) {
      const double harness = facet::knn_estimate(train, q, k);
      const double reference = oracle::knn_predict(frame, fm.factors, qv, k);
      c.require(harness == reference,
                "k-NN k=" + std::to_string(k) + " fold " + id + ": harness " +
                    Checks::str(harness) + " vs reference " + Checks::str(reference));
    }
    const double harness = facet::osr_estimate(train, q, facet::OsrConfig{}).first;
    const double reference = oracle::osr_predict(frame, fm.factors, qv, 4, 3, 5);
    c.require(harness == reference, "OSR fold " + id + ": harness " + Checks::str(harness) +
                                        " vs reference " + Checks::str(reference));
  }
}

void relief_signal_recovery(Checks& c) {
  int top2_hits = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const facet::Dataset base = testutil::correlated_dataset(60, 10, seed, 0.05);
    facet::ReliefConfig cfg;
    cfg.m = 60;
    cfg.k = 10;
    cfg.sigma = 20.0;

    const facet::WeightVector wv = facet::rrelieff(base, cfg, seed);
    std::vector<std::pair<std::string, double>> rows = wv.weights;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    const bool informative_on_top =
        (rows[0].first == "f1" && rows[1].first == "f2") ||
        (rows[0].first == "f2" && rows[1].first == "f1");
    if (informative_on_top) ++top2_hits;

    const facet::Dataset with_constant = with_extra(
        base, testutil::continuous("konst"), [](std::size_t) { return facet::Cell::number(2.5); });
    const facet::WeightVector wc = facet::rrelieff(with_constant, cfg, seed);
    c.require(wc.at("konst") == 0.0, "seed " + std::to_string(seed) +
                                         ": constant factor weight must be exactly 0, got " +
                                         Checks::str(wc.at("konst")));

    const std::size_t f1_col = base.require_column("f1");
    const facet::Dataset with_dup =
        with_extra(base, testutil::continuous("f1_copy"),
                   [&](std::size_t i) { return base.records()[i].values[f1_col]; });
    const facet::WeightVector wd = facet::rrelieff(with_dup, cfg, seed);
    c.close(wd.at("f1_copy"), wd.at("f1"), kTolLoose,
            "seed " + std::to_string(seed) + ": duplicated factor weights");

    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.require(secs < 5.0,
              "seed " + std::to_string(seed) + " took " + Checks::str(secs) + "s (limit 5s)");
  }
  c.require(top2_hits >= 28, "f1/f2 on top in only " + std::to_string(top2_hits) +
                                 "/30 seeds (need >= 28)");
}

// Every independent tracks one of two latent values, so any masked cell is
// recoverable from its sibling columns; this is the correlated regime the
// donor-based imputer is built for.
facet::Dataset latent_dataset(std::size_t n, std::uint64_t seed) {
  std::vector<facet::FactorDescriptor> descriptors;
  for (int f = 1; f <= 6; ++f) descriptors.push_back(testutil::continuous("f" + std::to_string(f)));
  descriptors.push_back(testutil::continuous("target", facet::Role::Dependent));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> wobble(0.0, 0.05);
  std::vector<facet::ProjectRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = unit(rng), v = unit(rng);
    facet::ProjectRecord r;
    r.id = "L" + std::to_string(i + 1);
    for (int f = 0; f < 3; ++f) r.values.push_back(facet::Cell::number(u + wobble(rng)));
    for (int f = 0; f < 3; ++f) r.values.push_back(facet::Cell::number(v + wobble(rng)));
    r.values.push_back(facet::Cell::number(10.0 + u + 0.5 * v));
    records.push_back(std::move(r));
  }
  return facet::Dataset(std::move(descriptors), std::move(records));
}

void imputation_quality(Checks& c) {
  int knn_wins = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const facet::Dataset full = latent_dataset(40, 100 + seed);
    const std::vector<std::size_t> cols = full.independent_columns();

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < full.records().size(); ++i)
      for (std::size_t cidx : cols) cells.emplace_back(i, cidx);
    std::mt19937_64 mask_rng(977 * seed + 13);
    std::shuffle(cells.begin(), cells.end(), mask_rng);
    cells.resize(cells.size() / 10);  // 10% of the independent cells

    std::vector<facet::ProjectRecord> records = full.records();
    std::vector<double> truth;
    for (const auto& [i, cidx] : cells) {
      truth.push_back(records[i].values[cidx].number());
      records[i].values[cidx] = facet::Cell::missing();
    }
    const facet::Dataset masked(full.descriptors(), std::move(records));
    const facet::Dataset imputed = facet::knn_impute(masked, {}, seed);

    std::vector<double> knn_filled;
    for (const auto& [i, cidx] : cells)
      knn_filled.push_back(imputed.records()[i].values[cidx].number());

    std::map<std::size_t, double> column_mean;
    for (std::size_t cidx : cols) {
      double sum = 0.0;
      std::size_t n = 0;
      for (const facet::ProjectRecord& r : masked.records())
        if (!r.values[cidx].is_missing()) {
          sum += r.values[cidx].number();
          ++n;
        }
      column_mean[cidx] = sum / static_cast<double>(n);
    }
    std::vector<double> mean_filled;
    for (const auto& [i, cidx] : cells) mean_filled.push_back(column_mean[cidx]);

    if (oracle::rmse(truth, knn_filled) <= oracle::rmse(truth, mean_filled)) ++knn_wins;

    if (seed == 0) {
      for (std::size_t i = 0; i < masked.records().size(); ++i)
        for (std::size_t v = 0; v < masked.records()[i].values.size(); ++v) {
          const facet::Cell& was = masked.records()[i].values[v];
          const facet::Cell& now = imputed.records()[i].values[v];
          if (!was.is_missing())
            c.require(was.is_number() && now.is_number() && was.number() == now.number(),
                      "non-missing cell changed at record " + std::to_string(i));
        }
    }
  }
  c.require(knn_wins >= 25, "k-NN imputation beat the column mean in only " +
                                std::to_string(knn_wins) + "/30 seeds (need >= 25)");

  // Duplicated-row construction: five identical donors pin the masked value.
  std::vector<facet::FactorDescriptor> descriptors{
      testutil::continuous("f1"), testutil::continuous("f2"),
      testutil::continuous("y", facet::Role::Dependent)};
  std::vector<facet::ProjectRecord> records;
  for (int i = 0; i < 6; ++i)
    records.push_back(testutil::record("twin" + std::to_string(i),
                                       {facet::Cell::number(7.5), facet::Cell::number(1.0),
                                        facet::Cell::number(10.0)}));
  records.push_back(testutil::record(
      "far1", {facet::Cell::number(50.0), facet::Cell::number(40.0), facet::Cell::number(60.0)}));
  records.push_back(testutil::record(
      "far2", {facet::Cell::number(55.0), facet::Cell::number(45.0), facet::Cell::number(65.0)}));
  records[3].values[0] = facet::Cell::missing();
  const facet::Dataset twins(std::move(descriptors), std::move(records));
  const facet::Dataset recovered = facet::knn_impute(twins, {.k = 5}, 0);
  c.require(recovered.records()[3].values[0].number() == 7.5,
            "duplicated-row recovery must be exact, got " +
                Checks::str(recovered.records()[3].values[0].number()));
}

void pruning_hand_fixture(Checks& c) {
  const facet::Dataset ds = facet::load_dataset(testutil::data_file("sparse.csv"),
                                                testutil::data_file("sparse.schema.json"));
  c.require(facet::profile_missingness(ds).total == 12.0 / 30.0,
            "missingness before pruning must be 12/30");

  const facet::Dataset pruned = facet::prune_missing(ds, {});
  std::vector<std::string> factors;
  for (const facet::FactorDescriptor& d : pruned.descriptors()) factors.push_back(d.name);
  const std::vector<std::string> expected_factors{"id", "f1", "f2", "f3", "f4", "productivity"};
  c.require(factors == expected_factors, "surviving factors must drop exactly f5");

  std::vector<std::string> ids;
  for (const facet::ProjectRecord& r : pruned.records()) ids.push_back(r.id);
  const std::vector<std::string> expected_ids{"p1", "p2", "p3", "p4", "p5"};
  c.require(ids == expected_ids, "surviving records must drop exactly p6");

  c.require(facet::profile_missingness(pruned).total == 3.0 / 20.0,
            "missingness after pruning must be 3/20");
  c.require(dataset_text(facet::prune_missing(pruned, {})) == dataset_text(pruned),
            "pruning must be idempotent");
}

void hierarchy_invariants(Checks& c) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int trees = 1100;
  for (int t = 0; t < trees && c.failures().size() < 8; ++t) {
    const facet::McdaNode tree = treegen::random_tree(rng);
    facet::validate_tree(tree);
    const std::vector<facet::Alternative> alts = treegen::random_alternatives(rng, 4);

    for (const facet::Alternative& alt : alts) {
      const double v = facet::evaluate(tree, alt);
      c.require(v >= 0.0 && v <= 1.0,
                "tree " + std::to_string(t) + ": preference " + Checks::str(v) + " outside [0,1]");
      const double flat = treegen::flatten_evaluate(tree, alt, 1.0);
      c.close(v, flat, kTolExact, "tree " + std::to_string(t) + ": weighted-sum reference");
    }

    const facet::PreferenceRanking full = facet::rank_alternatives(tree, alts);
    const std::vector<facet::Alternative> fewer(alts.begin(), alts.end() - 1);
    const facet::PreferenceRanking sub = facet::rank_alternatives(tree, fewer);
    for (const auto& [name, pref] : sub.entries)
      c.require(pref == full.at(name),
                "tree " + std::to_string(t) + ": deleting an alternative moved " + name);

    std::uniform_int_distribution<std::size_t> pick(0, tree.children.size() - 1);
    const std::vector<std::string> path{tree.children[pick(rng)].name};
    const double new_weight = unit(rng);
    const facet::McdaNode adjusted = facet::rebalance_weights(tree, path, new_weight);
    double sum = 0.0;
    for (const facet::McdaNode& child : adjusted.children) sum += child.weight;
    c.close(sum, 1.0, kTolLoose, "tree " + std::to_string(t) + ": rebalanced sibling sum");
    for (const facet::McdaNode& child : adjusted.children)
      if (child.name == path[0])
        c.require(child.weight == new_weight,
                  "tree " + std::to_string(t) + ": rebalance must pin the requested weight");
  }

  // Extreme data shares reproduce the single-source orderings.
  facet::WeightVector wv;
  wv.weights = {{"a", 0.4}, {"b", -0.1}, {"c", 0.0}, {"d", 0.2}};
  std::map<std::string, facet::MeanCriteria> scores;
  scores["a"] = {4.0, 2.0, 3.0};
  scores["c"] = {2.0, 5.0, 1.0};

  const facet::DefaultTree data_only = facet::build_default_tree(wv, scores, 1.0);
  const facet::PreferenceRanking data_rank =
      facet::rank_alternatives(data_only.tree, data_only.alternatives);
  std::vector<std::string> data_order;
  for (const auto& [name, pref] : data_rank.entries) data_order.push_back(name);
  c.require(data_order == std::vector<std::string>{"a", "d", "c", "b"},
            "data share 1 must rank by weight order");

  const facet::DefaultTree expert_only = facet::build_default_tree(wv, scores, 0.0);
  const facet::PreferenceRanking expert_rank =
      facet::rank_alternatives(expert_only.tree, expert_only.alternatives);
  const double wi = 1.0 / 3.0, wc = 1.0 / 3.0, wd = 1.0 - 2.0 / 3.0;
  auto expert_pref = [&](double impact, double difficulty, double controllability) {
    return wi * (impact - 1.0) / 4.0 + wc * (controllability - 1.0) / 4.0 +
           wd * (1.0 - (difficulty - 1.0) / 4.0);
  };
  c.close(expert_rank.at("a"), expert_pref(4.0, 2.0, 3.0), kTolExact, "expert-only pref of a");
  c.close(expert_rank.at("c"), expert_pref(2.0, 5.0, 1.0), kTolExact, "expert-only pref of c");
  c.close(expert_rank.at("b"), expert_pref(3.0, 3.0, 3.0), kTolExact, "expert-only pref of b");
  std::vector<std::string> expert_order;
  for (const auto& [name, pref] : expert_rank.entries) expert_order.push_back(name);
  c.require(expert_order == std::vector<std::string>{"a", "b", "d", "c"},
            "data share 0 must rank by the expert branch alone");
}

void statistics_ground_truths(Checks& c) {
  const std::vector<std::vector<double>> same{{1, 2, 3, 4}, {1, 2, 3, 4}, {1, 2, 3, 4}};
  c.close(facet::kendall_w(same).w, 1.0, kTolExact, "W on identical rankings");

  const std::vector<std::vector<double>> opposed{{1, 2, 3}, {3, 2, 1}};
  c.close(facet::kendall_w(opposed).w, 0.0, kTolExact, "W on opposed rankings");

  const std::vector<double> low{1.0, 2.0, 3.0};
  const std::vector<double> high{4.0, 5.0, 6.0};
  c.close(facet::anova_mre(low, high).f, 13.5, kTolExact, "ANOVA F on {1,2,3} vs {4,5,6}");

  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 12);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> a(size(rng)), b(size(rng));
    for (double& v : a) v = unit(rng);
    for (double& v : b) v = unit(rng);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double ma = facet::stats::mean(a), mb = facet::stats::mean(b);
    double ssw = 0.0;
    for (double v : a) ssw += (v - ma) * (v - ma);
    for (double v : b) ssw += (v - mb) * (v - mb);
    if (ssw == 0.0) continue;
    const double t = (ma - mb) / std::sqrt(ssw / (na + nb - 2.0) * (1.0 / na + 1.0 / nb));
    c.close(facet::anova_mre(a, b).f, t * t, kTolLoose,
            "F = t^2 on random pair " + std::to_string(round));
  }
}

void concordance_direction(Checks& c) {
  std::ifstream in(testutil::data_file("fc_ranks.csv"));
  c.require(static_cast<bool>(in), "fc_ranks.csv must be readable");
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> expert, data, integrated;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string factor, e, d, i;
    std::getline(row, factor, ',');
    std::getline(row, e, ',');
    std::getline(row, d, ',');
    std::getline(row, i, ',');
    expert.push_back(std::stod(e));
    data.push_back(std::stod(d));
    integrated.push_back(std::stod(i));
  }
  c.require(expert.size() == 8, "fc_ranks.csv must rank 8 factors");

  const std::vector<std::vector<double>> two{expert, data};
  const std::vector<std::vector<double>> three{expert, data, integrated};
  const facet::ConcordanceResult w2 = facet::kendall_w(two);
  const facet::ConcordanceResult w3 = facet::kendall_w(three);
  c.close(w2.w, oracle::kendall_w(two), kTolExact, "W(FC_E, FC_R) against the reference");
  c.close(w3.w, oracle::kendall_w(three), kTolExact, "W(FC_E, FC_R, FC_I) against the reference");
  c.require(w3.w >= w2.w, "integrating must not lower concordance: W3 " + Checks::str(w3.w) +
                              " < W2 " + Checks::str(w2.w));
}

void end_to_end_determinism(Checks& c) {
  const std::string manifest = testutil::data_file("manifest.json").string();
  std::vector<std::map<std::string, std::string>> snapshots;
  for (int round = 0; round < 3; ++round) {
    testutil::TempDir out("accept-run");
    const int code =
        run_cli("run --manifest '" + manifest + "' --output-dir '" + out.path().string() + "'");
    c.require(code == 0, "run " + std::to_string(round) + " exited with " + std::to_string(code));
    if (code == 0) snapshots.push_back(snapshot(out.path()));
  }
  if (snapshots.size() == 3) {
    c.require(!snapshots[0].empty(), "run produced no artifacts");
    c.require(snapshots[0].count("sets.json") == 1, "run must write sets.json");
    c.require(snapshots[0] == snapshots[1] && snapshots[1] == snapshots[2],
              "rerun artifacts differ byte for byte");
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double limit_seconds;  // 0 = no limit
    void (*body)(Checks&);
  };
  const std::vector<Criterion> criteria{
      {1, "accuracy metrics are exact on the worked fixture", 0.0, metric_exactness},
      {2, "cross-validation matches the independent reference fold by fold", 10.0,
       loocv_oracle_equivalence},
      {3, "factor weighting recovers the planted synthetic signal", 0.0,
       relief_signal_recovery},
      {4, "nearest-neighbor imputation beats the column-mean baseline", 10.0,
       imputation_quality},
      {5, "pruning reproduces the hand-computed fixture", 0.0, pruning_hand_fixture},
      {6, "hierarchy evaluation invariants hold on random trees", 30.0, hierarchy_invariants},
      {7, "statistics match their ground truths", 0.0, statistics_ground_truths},
      {8, "integrated rankings do not lower expert concordance", 0.0, concordance_direction},
      {9, "the manifest pipeline is deterministic end to end", 60.0, end_to_end_determinism},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    Checks checks;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criterion.body(checks);
    } catch (const std::exception& e) {
      checks.require(false, std::string("unexpected exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (criterion.limit_seconds > 0.0)
      checks.require(secs < criterion.limit_seconds,
                     "runtime " + Checks::str(secs) + "s exceeds the " +
                         Checks::str(criterion.limit_seconds) + "s limit");

    const bool ok = checks.failures().empty();
    if (!ok) ++failed;
    std::printf("[%s] criterion %d: %s (%.2fs)\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.title, secs);
    for (const std::string& what : checks.failures()) std::printf("        - %s\n", what.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
