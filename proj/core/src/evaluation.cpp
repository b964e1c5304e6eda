#include "facet/evaluation.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "csv.hpp"
#include "facet/errors.hpp"
#include "facet/stats.hpp"

namespace facet {

namespace {

constexpr double kAlpha = 0.02;

// Records eligible for LOOCV: dependent present, numeric and positive.
std::vector<std::size_t> eligible_records(const Dataset& ds) {
  const std::size_t dep = ds.require_dependent();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.records().size(); ++i) {
    const Cell& cell = ds.records()[i].values[dep];
    if (!cell.is_missing() && cell.number() > 0.0) rows.push_back(i);
  }
  return rows;
}

FactorSet measured_subset(const Dataset& ds, const FactorSet& fs) {
  std::vector<std::string> measured;
  for (std::size_t c : ds.independent_columns()) measured.push_back(ds.descriptors()[c].name);
  FactorSet fm = make_factor_set(fs.label, std::move(measured));
  return set_intersection(fs.label, fs, fm);
}

}  // namespace

double mre(double actual, double predicted) {
  if (actual <= 0.0)
    throw ValidationError(fmt::format("MRE needs a positive actual value, got {}", actual));
  return std::fabs(actual - predicted) / actual;
}

MetricsSummary summarize(std::span<const EstimateRecord> records) {
  if (records.empty()) throw ValidationError("cannot summarize an empty estimate list");
  std::vector<double> mres;
  mres.reserve(records.size());
  std::size_t hits = 0;
  for (const EstimateRecord& r : records) {
    mres.push_back(r.mre);
    if (r.mre <= 0.25) ++hits;
  }
  MetricsSummary s;
  s.folds = records.size();
  s.mmre = stats::mean(mres);
  s.mdmre = stats::median(mres);
  s.pred25 = static_cast<double>(hits) / static_cast<double>(records.size());
  return s;
}

Estimator make_estimator(const EstimatorSpec& spec) {
  if (spec.name == "knn") {
    const std::size_t k = spec.knn_k;
    return [k](const Dataset& train, const EstimationQuery& q) {
      return knn_estimate(train, q, k);
    };
  }
  if (spec.name == "osr") {
    const OsrConfig cfg = spec.osr;
    return [cfg](const Dataset& train, const EstimationQuery& q) {
      return osr_estimate(train, q, cfg).first;
    };
  }
  throw ValidationError(fmt::format("unknown estimator '{}' (expected knn or osr)", spec.name));
}

std::vector<EstimateRecord> loocv(const Dataset& ds, const Estimator& estimator,
                                  const FactorSet& fs, std::size_t jobs) {
  if (jobs < 1) throw ValidationError("loocv needs jobs >= 1");
  const std::size_t dep = ds.require_dependent();
  const std::vector<std::size_t> rows = eligible_records(ds);
  if (rows.size() < 3)
    throw ValidationError(fmt::format(
        "loocv needs at least 3 records with a positive dependent value, got {}", rows.size()));

  std::vector<EstimateRecord> results(rows.size());
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_fold = [&](std::size_t fold) {
    const std::size_t target = rows[fold];
    const ProjectRecord& held_out = ds.records()[target];

    std::vector<ProjectRecord> train_records;
    train_records.reserve(ds.records().size() - 1);
    for (std::size_t i = 0; i < ds.records().size(); ++i)
      if (i != target) train_records.push_back(ds.records()[i]);
    Dataset train(ds.descriptors(), std::move(train_records));
    for (const ProjectRecord& r : train.records())
      if (r.id == held_out.id)
        throw Error(fmt::format("fold for '{}' leaked the held-out record", held_out.id));

    EstimationQuery q;
    q.record = held_out;
    q.record.values[dep] = Cell::missing();
    q.active = fs;

    const double actual = held_out.values[dep].number();
    const double predicted = estimator(train, q);
    results[fold] = EstimateRecord{held_out.id, actual, predicted, mre(actual, predicted)};
  };

  if (jobs == 1) {
    for (std::size_t fold = 0; fold < rows.size(); ++fold) run_fold(fold);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t fold = next.fetch_add(1); fold < rows.size(); fold = next.fetch_add(1)) {
        try {
          run_fold(fold);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = std::min(jobs, rows.size());
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

AnovaResult anova_mre(std::span<const double> group_a, std::span<const double> group_b) {
  if (group_a.size() < 2 || group_b.size() < 2)
    throw ValidationError("ANOVA needs at least 2 observations per group");

  const double na = static_cast<double>(group_a.size());
  const double nb = static_cast<double>(group_b.size());
  const double mean_a = stats::mean(group_a);
  const double mean_b = stats::mean(group_b);
  const double grand = (na * mean_a + nb * mean_b) / (na + nb);

  const double ssb = na * (mean_a - grand) * (mean_a - grand) +
                     nb * (mean_b - grand) * (mean_b - grand);
  double ssw = 0.0;
  for (double x : group_a) ssw += (x - mean_a) * (x - mean_a);
  for (double x : group_b) ssw += (x - mean_b) * (x - mean_b);
  const double df2 = na + nb - 2.0;

  AnovaResult r;
  if (ssw == 0.0) {
    if (mean_a == mean_b) {
      r.f = 0.0;
      r.p = 1.0;
    } else {
      r.f = std::numeric_limits<double>::infinity();
      r.p = 0.0;
      r.degenerate = true;
    }
  } else {
    r.f = ssb / (ssw / df2);
    r.p = stats::f_survival(r.f, 1.0, df2);
  }
  r.significant = r.p < kAlpha;
  return r;
}

EvaluationReport compare_factor_sets(const Dataset& ds, std::span<const EstimatorSpec> estimators,
                                     std::span<const FactorSet> sets, std::size_t jobs) {
  if (estimators.empty()) throw ValidationError("no estimators configured");
  if (sets.empty()) throw ValidationError("no factor sets configured");
  std::set<std::string> labels;
  for (const FactorSet& fs : sets)
    if (!labels.insert(fs.label).second)
      throw ValidationError(fmt::format("duplicate factor set label '{}'", fs.label));
  std::set<std::string> estimator_labels;
  for (const EstimatorSpec& spec : estimators)
    if (!estimator_labels.insert(spec.name).second)
      throw ValidationError(fmt::format("duplicate estimator '{}'", spec.name));

  EvaluationReport report;
  report.excluded_records = ds.records().size() - eligible_records(ds).size();

  // MRE lists per (estimator, set) for the ANOVA matrix.
  std::map<std::pair<std::string, std::string>, std::vector<double>> mre_lists;
  for (const EstimatorSpec& spec : estimators) {
    const Estimator estimator = make_estimator(spec);
    for (const FactorSet& fs : sets) {
      const FactorSet active = measured_subset(ds, fs);
      if (active.factors.empty())
        throw ValidationError(
            fmt::format("factor set '{}' shares no factor with the dataset", fs.label));
      const std::vector<EstimateRecord> records = loocv(ds, estimator, active, jobs);
      EvaluationRow row;
      row.estimator = spec.name;
      row.set_label = fs.label;
      row.set_size = fs.factors.size();
      row.factors_used = active.factors.size();
      row.summary = summarize(records);
      report.rows.push_back(std::move(row));
      auto& mres = mre_lists[{spec.name, fs.label}];
      for (const EstimateRecord& r : records) mres.push_back(r.mre);
    }
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const auto& a, const auto& b) {
    if (a.estimator != b.estimator) return a.estimator < b.estimator;
    return a.set_label < b.set_label;
  });

  std::vector<std::string> sorted_labels(labels.begin(), labels.end());
  std::vector<std::string> estimator_names;
  for (const EstimatorSpec& spec : estimators) estimator_names.push_back(spec.name);
  std::sort(estimator_names.begin(), estimator_names.end());
  for (const std::string& estimator : estimator_names)
    for (std::size_t i = 0; i < sorted_labels.size(); ++i)
      for (std::size_t j = i + 1; j < sorted_labels.size(); ++j) {
        const auto& a = mre_lists.at({estimator, sorted_labels[i]});
        const auto& b = mre_lists.at({estimator, sorted_labels[j]});
        report.anova.push_back(
            {estimator, sorted_labels[i], sorted_labels[j], anova_mre(a, b)});
      }
  return report;
}

void write_report_csv(const EvaluationReport& report, std::ostream& out) {
  out << "estimator,factor_set,set_size,factors_used,folds,mmre,mdmre,pred25\n";
  for (const EvaluationRow& r : report.rows)
    out << csv::escape(r.estimator) << ',' << csv::escape(r.set_label) << ',' << r.set_size << ','
        << r.factors_used << ',' << r.summary.folds << ',' << csv::format_double(r.summary.mmre)
        << ',' << csv::format_double(r.summary.mdmre) << ','
        << csv::format_double(r.summary.pred25) << '\n';
}

void write_report_json(const EvaluationReport& report, std::ostream& out) {
  nlohmann::ordered_json j;
  j["excluded_records"] = report.excluded_records;
  j["rows"] = nlohmann::ordered_json::array();
  for (const EvaluationRow& r : report.rows)
    j["rows"].push_back({{"estimator", r.estimator},
                         {"factor_set", r.set_label},
                         {"set_size", r.set_size},
                         {"factors_used", r.factors_used},
                         {"folds", r.summary.folds},
                         {"mmre", r.summary.mmre},
                         {"mdmre", r.summary.mdmre},
                         {"pred25", r.summary.pred25}});
  j["anova"] = nlohmann::ordered_json::array();
  for (const AnovaEntry& e : report.anova) {
    nlohmann::ordered_json entry{{"estimator", e.estimator},
                                 {"set_a", e.set_a},
                                 {"set_b", e.set_b},
                                 {"significant", e.result.significant},
                                 {"degenerate", e.result.degenerate}};
    entry["f"] = std::isfinite(e.result.f) ? nlohmann::ordered_json(e.result.f)
                                           : nlohmann::ordered_json("infinite");
    entry["p"] = e.result.p;
    j["anova"].push_back(std::move(entry));
  }
  out << j.dump(2) << '\n';
}

void write_report_table(const EvaluationReport& report, std::ostream& out) {
  std::size_t est_w = 9, set_w = 10;
  for (const EvaluationRow& r : report.rows) {
    est_w = std::max(est_w, r.estimator.size());
    set_w = std::max(set_w, r.set_label.size());
  }
  out << fmt::format("{:<{}}  {:<{}}  {:>7}  {:>7}  {:>7}  {:>8}\n", "estimator", est_w,
                     "factor set", set_w, "folds", "MMRE", "MdMRE", "Pred(25)");
  for (const EvaluationRow& r : report.rows)
    out << fmt::format("{:<{}}  {:<{}}  {:>7}  {:>6.1f}%  {:>6.1f}%  {:>7.1f}%\n", r.estimator,
                       est_w, r.set_label, set_w, r.summary.folds, 100.0 * r.summary.mmre,
                       100.0 * r.summary.mdmre, 100.0 * r.summary.pred25);
  if (report.excluded_records > 0)
    out << fmt::format("({} record(s) without a usable dependent value excluded)\n",
                       report.excluded_records);
  if (!report.anova.empty()) {
    out << fmt::format("\n{:<{}}  {:<{}}  {:<{}}  {:>10}  {:>8}  {}\n", "estimator", est_w, "set a",
                       set_w, "set b", set_w, "F", "p", "significant");
    for (const AnovaEntry& e : report.anova)
      out << fmt::format("{:<{}}  {:<{}}  {:<{}}  {:>10.4f}  {:>8.4f}  {}\n", e.estimator, est_w,
                         e.set_a, set_w, e.set_b, set_w, e.result.f, e.result.p,
                         e.result.significant ? "yes" : "no");
  }
}

}  // namespace facet
