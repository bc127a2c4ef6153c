#include <benchmark/benchmark.h>

#include "mecmfg/cost.hpp"
#include "mecmfg/mfg.hpp"

namespace {

using namespace mecmfg;

SystemConfig bench_system() {
  SystemConfig cfg;
  cfg.num_ues = 10;
  cfg.es_rate = 10.0;
  cfg.scalarization = 10.0;
  cfg.aoi_weights = PerClass<double>{{20.0, 5.0, 2.0}};
  UEProfile prof;
  prof.name = "default";
  prof.arrival_rates = PerClass<double>{{1.0, 3.0, 6.0}};
  prof.eta = 1.0;
  prof.f_max = 2.0;
  prof.weight = 1.0;
  cfg.profiles = {prof};
  return cfg;
}

Policy bench_policy() {
  Policy p;
  p.p = PerClass<double>{{0.6, 0.5, 0.6}};
  p.mu0 = 0.7;
  return p;
}

void BM_CostMeanField(benchmark::State& state) {
  const auto cfg = bench_system();
  MeanField rho;
  rho.rho = PerClass<double>{{0.04, 0.15, 0.24}};
  const auto pol = bench_policy();
  for (auto _ : state) {
    benchmark::DoNotOptimize(aoi::cost_meanfield(pol, rho, cfg.profiles[0], cfg));
  }
}
BENCHMARK(BM_CostMeanField);

void BM_BestResponsePass(benchmark::State& state) {
  const auto cfg = bench_system();
  MeanField rho;
  rho.rho = PerClass<double>{{0.04, 0.15, 0.24}};
  const mfg::CostFn cost = [&](const mfg::PolicyVector& x) {
    return aoi::cost_meanfield(x.to_policy(), rho, cfg.profiles[0], cfg);
  };
  mfg::SolverSettings settings;
  const auto x0 = mfg::PolicyVector::from_policy(bench_policy());
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::best_response(cost, x0, settings, 2.0));
  }
}
BENCHMARK(BM_BestResponsePass);

void BM_SolveMfe(benchmark::State& state) {
  const auto cfg = bench_system();
  mfg::SolverSettings settings;
  const auto rho0 = mfg::mf_from_policies({bench_policy()}, cfg.profiles, cfg.es_rate);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::solve_mfe(cfg, settings, rho0, {bench_policy()}));
  }
}
BENCHMARK(BM_SolveMfe)->Unit(benchmark::kMillisecond);

}  // namespace
