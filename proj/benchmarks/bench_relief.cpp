#include <benchmark/benchmark.h>

#include <facet/relief.hpp>

#include "synthetic.hpp"

namespace {

void BM_RReliefF(benchmark::State& state) {
  const auto records = static_cast<std::size_t>(state.range(0));
  const auto factors = static_cast<std::size_t>(state.range(1));
  const facet::Dataset ds = bench::make_dataset(records, factors, 0.0, 7);
  facet::ReliefConfig cfg;
  cfg.k = 10;
  for (auto _ : state) {
    facet::WeightVector wv = facet::rrelieff(ds, cfg, 7);
    benchmark::DoNotOptimize(wv);
  }
  state.SetComplexityN(state.range(0));
}

}  // namespace

BENCHMARK(BM_RReliefF)
    ->Args({60, 10})
    ->Args({120, 10})
    ->Args({240, 10})
    ->Args({240, 40})
    ->Complexity();
