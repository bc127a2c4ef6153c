#include <benchmark/benchmark.h>

#include "mecmfg/chains.hpp"
#include "mecmfg/shs.hpp"

namespace {

void BM_RedClosedForm(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mecmfg::aoi::red_aoi_closed_form(1.0, 0.6, 3.6, 0.7, 10.0));
  }
}
BENCHMARK(BM_RedClosedForm);

void BM_RedPipeline(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(mecmfg::aoi::red_aoi_pipeline(1.0, 0.6, 3.6, 0.7, 10.0));
  }
}
BENCHMARK(BM_RedPipeline);

void BM_YgPipeline(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mecmfg::aoi::yg_aoi(3.0, 0.5, 13.5, 4.0, 0.6, 0.7, 10.0));
  }
}
BENCHMARK(BM_YgPipeline);

void BM_BuildYgChain(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mecmfg::aoi::build_yg_chain(3.0, 0.5, 13.5, 4.0, 0.6, 0.7, 10.0));
  }
}
BENCHMARK(BM_BuildYgChain);

}  // namespace
