#include <benchmark/benchmark.h>

#include <facet/evaluation.hpp>

#include "synthetic.hpp"

namespace {

facet::FactorSet all_factors(const facet::Dataset& ds) {
  std::vector<std::string> names;
  for (std::size_t c : ds.independent_columns()) names.push_back(ds.descriptors()[c].name);
  return facet::make_factor_set("FM", std::move(names));
}

void BM_LoocvKnn(benchmark::State& state) {
  const auto records = static_cast<std::size_t>(state.range(0));
  const facet::Dataset ds = bench::make_dataset(records, 10, 0.0, 3);
  const facet::FactorSet fm = all_factors(ds);
  const facet::Estimator est = facet::make_estimator({"knn", 3, {}});
  for (auto _ : state) {
    auto folds = facet::loocv(ds, est, fm);
    benchmark::DoNotOptimize(folds);
  }
}

void BM_LoocvOsr(benchmark::State& state) {
  const auto records = static_cast<std::size_t>(state.range(0));
  const facet::Dataset ds = bench::make_dataset(records, 10, 0.0, 3);
  const facet::FactorSet fm = all_factors(ds);
  const facet::Estimator est = facet::make_estimator({"osr", 3, {}});
  for (auto _ : state) {
    auto folds = facet::loocv(ds, est, fm);
    benchmark::DoNotOptimize(folds);
  }
}

}  // namespace

BENCHMARK(BM_LoocvKnn)->Arg(30)->Arg(60)->Arg(120);
BENCHMARK(BM_LoocvOsr)->Arg(30)->Arg(60)->Arg(120);
