#include <benchmark/benchmark.h>

#include <facet/impute.hpp>

#include "synthetic.hpp"

namespace {

void BM_KnnImpute(benchmark::State& state) {
  const auto records = static_cast<std::size_t>(state.range(0));
  const facet::Dataset ds = bench::make_dataset(records, 12, 0.15, 11);
  facet::ImputationConfig cfg;
  for (auto _ : state) {
    facet::Dataset complete = facet::knn_impute(ds, cfg, 11);
    benchmark::DoNotOptimize(complete);
  }
}

}  // namespace

BENCHMARK(BM_KnnImpute)->Arg(30)->Arg(80)->Arg(160);
