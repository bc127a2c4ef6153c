#include <benchmark/benchmark.h>

#include "mecmfg/des.hpp"

namespace {

using namespace mecmfg;

void BM_SimulateEvents(benchmark::State& state) {
  SystemConfig sys;
  sys.num_ues = 10;
  sys.es_rate = 10.0;
  sys.scalarization = 10.0;
  sys.aoi_weights = PerClass<double>{{20.0, 5.0, 2.0}};
  UEProfile prof;
  prof.name = "default";
  prof.arrival_rates = PerClass<double>{{1.0, 3.0, 6.0}};
  prof.eta = 1.0;
  prof.f_max = 2.0;
  prof.weight = 1.0;
  sys.profiles = {prof};
  Policy pol;
  pol.p = PerClass<double>{{0.6, 0.5, 0.6}};
  pol.mu0 = 0.7;

  des::SimConfig cfg = des::make_symmetric_config(sys, {pol});
  cfg.event_budget = static_cast<std::uint64_t>(state.range(0));
  cfg.rng_seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(des::simulate(cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateEvents)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
