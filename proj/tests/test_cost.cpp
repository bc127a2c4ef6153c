#include <doctest.h>

#include <cmath>
#include <random>

#include "mecmfg/chains.hpp"
#include "mecmfg/cost.hpp"

using namespace mecmfg;

namespace {

UEProfile reference_profile() {
  UEProfile p;
  p.name = "default";
  p.arrival_rates[TaskClass::Red] = 1.0;
  p.arrival_rates[TaskClass::Yellow] = 3.0;
  p.arrival_rates[TaskClass::Green] = 6.0;
  p.eta = 1.0;
  p.f_max = 2.0;
  p.weight = 1.0;
  return p;
}

Policy reference_policy() {
  Policy p;
  p.p[TaskClass::Red] = 0.6;
  p.p[TaskClass::Yellow] = 0.5;
  p.p[TaskClass::Green] = 0.6;
  p.mu0 = 0.7;
  return p;
}

SystemConfig reference_system() {
  SystemConfig cfg;
  cfg.num_ues = 10;
  cfg.es_rate = 10.0;
  cfg.scalarization = 10.0;
  cfg.aoi_weights[TaskClass::Red] = 20.0;
  cfg.aoi_weights[TaskClass::Yellow] = 5.0;
  cfg.aoi_weights[TaskClass::Green] = 2.0;
  cfg.profiles = {reference_profile()};
  return cfg;
}

std::vector<std::pair<Policy, UEProfile>> symmetric_deployment(int n) {
  return std::vector<std::pair<Policy, UEProfile>>(static_cast<std::size_t>(n),
                                                   {reference_policy(), reference_profile()});
}

}  // namespace

TEST_CASE("busy fractions") {
  UEProfile prof = reference_profile();
  Policy pol = reference_policy();
  SUBCASE("basic value") {
    pol.mu0 = 1.0;
    const auto t = aoi::busy_fractions(pol, prof);
    CHECK(t[TaskClass::Red] == doctest::Approx(0.375).epsilon(1e-15));
  }
  SUBCASE("all-offload policy idles the local processor") {
    for (TaskClass c : kTaskClasses) pol.p[c] = 0.0;
    const auto t = aoi::busy_fractions(pol, prof);
    for (TaskClass c : kTaskClasses) CHECK(t[c] == 0.0);
  }
  SUBCASE("mu0 = 0 with local arrivals saturates") {
    pol.mu0 = 0.0;
    const auto t = aoi::busy_fractions(pol, prof);
    CHECK(t[TaskClass::Red] == 1.0);
  }
  SUBCASE("mu0 = 0 with no local arrivals is idle, not 0/0") {
    pol.mu0 = 0.0;
    for (TaskClass c : kTaskClasses) pol.p[c] = 0.0;
    const auto t = aoi::busy_fractions(pol, prof);
    for (TaskClass c : kTaskClasses) CHECK(t[c] == 0.0);
  }
}

TEST_CASE("local power") {
  UEProfile prof = reference_profile();
  Policy pol = reference_policy();
  SUBCASE("zero frequency draws nothing") {
    pol.mu0 = 0.0;
    CHECK(aoi::local_power(pol, prof) == 0.0);
  }
  SUBCASE("all-offload draws nothing") {
    for (TaskClass c : kTaskClasses) pol.p[c] = 0.0;
    CHECK(aoi::local_power(pol, prof) == 0.0);
  }
  SUBCASE("frozen fixture at the standard point") {
    // t = (6/13, 15/22, 36/43), bracket = 11955/12298, power = bracket * 0.343
    const double expected = 11955.0 / 12298.0 * 0.343;
    CHECK(aoi::local_power(pol, prof) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("occupancy bracket stays a probability") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> prob(0.0, 1.0);
    std::uniform_real_distribution<double> freq(0.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      Policy p;
      for (TaskClass c : kTaskClasses) p.p[c] = prob(rng);
      p.mu0 = freq(rng);
      const double power = aoi::local_power(p, prof);
      const double mu03 = p.mu0 * p.mu0 * p.mu0;
      if (mu03 > 0.0) {
        const double bracket = power / (prof.eta * mu03);
        CHECK(bracket >= 0.0);
        CHECK(bracket <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("finite-population exogenous rates") {
  SUBCASE("two identical devices") {
    const auto all = symmetric_deployment(2);
    const auto rates = aoi::exogenous_rates_finite(all, 0);
    CHECK(rates.lambda_minus[TaskClass::Red] == doctest::Approx(0.4).epsilon(1e-15));
    // the higher-priority pool counts both devices' offloaded reds
    CHECK(rates.lambda_high_total[TaskClass::Yellow] ==
          doctest::Approx(0.8).epsilon(1e-15));
    CHECK(rates.lambda_high_local[TaskClass::Yellow] ==
          doctest::Approx(0.6).epsilon(1e-15));
    CHECK(rates.lambda_high_local[TaskClass::Green] ==
          doctest::Approx(0.6 + 1.5).epsilon(1e-15));
  }
  SUBCASE("single device sees no same-class traffic") {
    const auto all = symmetric_deployment(1);
    const auto rates = aoi::exogenous_rates_finite(all, 0);
    for (TaskClass c : kTaskClasses) CHECK(rates.lambda_minus[c] == 0.0);
  }
  SUBCASE("self index is range-checked") {
    const auto all = symmetric_deployment(2);
    CHECK_THROWS_AS(aoi::exogenous_rates_finite(all, 2), std::out_of_range);
  }
}

TEST_CASE("mean-field exogenous rates") {
  SUBCASE("empty field") {
    const auto rates =
        aoi::exogenous_rates_meanfield(MeanField{}, 10, 10.0, reference_policy(), reference_profile());
    for (TaskClass c : kTaskClasses) {
      CHECK(rates.lambda_minus[c] == 0.0);
      CHECK(rates.lambda_high_total[c] == 0.0);
    }
  }
  SUBCASE("substitution arithmetic") {
    MeanField rho;
    rho.rho[TaskClass::Red] = 0.04;
    const auto rates =
        aoi::exogenous_rates_meanfield(rho, 10, 10.0, reference_policy(), reference_profile());
    CHECK(rates.lambda_minus[TaskClass::Red] == doctest::Approx(3.6).epsilon(1e-15));
    CHECK(rates.lambda_high_total[TaskClass::Yellow] ==
          doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("matches the finite rates up to the self-exclusion gap") {
    // two device types so the generic device differs from the average
    UEProfile heavy = reference_profile();
    heavy.name = "heavy";
    heavy.arrival_rates[TaskClass::Red] = 2.0;
    heavy.weight = 0.5;
    UEProfile light = reference_profile();
    light.name = "light";
    light.weight = 0.5;
    Policy pol = reference_policy();
    const double mu = 10.0;

    for (int n : {10, 100, 1000}) {
      std::vector<std::pair<Policy, UEProfile>> all;
      for (int i = 0; i < n / 2; ++i) all.emplace_back(pol, heavy);
      for (int i = n / 2; i < n; ++i) all.emplace_back(pol, light);
      const auto finite = aoi::exogenous_rates_finite(all, 0);

      MeanField rho;
      for (TaskClass c : kTaskClasses) {
        rho.rho[c] = (0.5 * heavy.arrival_rates[c] + 0.5 * light.arrival_rates[c]) *
                     (1.0 - pol.p[c]) / mu;
      }
      const auto mf = aoi::exogenous_rates_meanfield(rho, n, mu, pol, heavy);
      for (TaskClass c : kTaskClasses) {
        const double gap =
            std::abs(mf.lambda_minus[c] - finite.lambda_minus[c]);
        // discrepancy is one device's own offload vs the population average
        CHECK(gap <= 1.0);
        if (finite.lambda_minus[c] > 0.0) {
          CHECK(gap / finite.lambda_minus[c] <= 2.0 / (n - 1));
        }
      }
      CHECK(mf.lambda_high_total[TaskClass::Yellow] ==
            doctest::Approx(finite.lambda_high_total[TaskClass::Yellow]).epsilon(1e-12));
    }
  }
}

TEST_CASE("weighted aoi") {
  const auto cfg = reference_system();
  const auto all = symmetric_deployment(10);
  const auto rates = aoi::exogenous_rates_finite(all, 0);

  SUBCASE("frozen per-class fixtures at the standard symmetric point") {
    const auto breakdown = aoi::weighted_aoi(rates, reference_policy(), reference_profile(), cfg);
    CHECK(breakdown.per_class[TaskClass::Red] ==
          doctest::Approx(837515.0 / 455851.0).epsilon(1e-12));
    CHECK(breakdown.per_class[TaskClass::Yellow] ==
          doctest::Approx(1.8975103507532158).epsilon(1e-10));
    CHECK(breakdown.per_class[TaskClass::Green] ==
          doctest::Approx(4.134194952222742).epsilon(1e-10));
    CHECK(breakdown.weighted == doctest::Approx(54.50106232263913).epsilon(1e-10));
  }
  SUBCASE("degenerate weights pick out one class") {
    SystemConfig cfg2 = cfg;
    cfg2.aoi_weights = PerClass<double>{{1.0, 0.0, 0.0}};
    const auto breakdown = aoi::weighted_aoi(rates, reference_policy(), reference_profile(), cfg2);
    CHECK(breakdown.weighted ==
          doctest::Approx(breakdown.per_class[TaskClass::Red]).epsilon(1e-12));
  }
  SUBCASE("weight scaling is linear and leaves per-class values alone") {
    const auto base = aoi::weighted_aoi(rates, reference_policy(), reference_profile(), cfg);
    SystemConfig cfg2 = cfg;
    for (TaskClass c : kTaskClasses) cfg2.aoi_weights[c] *= 3.0;
    const auto scaled = aoi::weighted_aoi(rates, reference_policy(), reference_profile(), cfg2);
    CHECK(scaled.weighted == doctest::Approx(3.0 * base.weighted).epsilon(1e-12));
    for (TaskClass c : kTaskClasses) {
      CHECK(scaled.per_class[c] == doctest::Approx(base.per_class[c]).epsilon(1e-15));
    }
  }
  SUBCASE("aoi dominates the inter-arrival lower bound") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> freq(0.2, 2.0);
    for (int i = 0; i < 20; ++i) {
      Policy p;
      for (TaskClass c : kTaskClasses) p.p[c] = prob(rng);
      p.mu0 = freq(rng);
      std::vector<std::pair<Policy, UEProfile>> all2(10, {p, reference_profile()});
      const auto r = aoi::exogenous_rates_finite(all2, 0);
      const auto breakdown = aoi::weighted_aoi(r, p, reference_profile(), cfg);
      for (TaskClass c : kTaskClasses) {
        CHECK(breakdown.per_class[c] >= 1.0 / reference_profile().arrival_rates[c]);
      }
    }
  }
}

TEST_CASE("finite cost") {
  const auto cfg = reference_system();
  SUBCASE("V = 0 leaves only power") {
    SystemConfig cfg2 = cfg;
    cfg2.scalarization = 1e-300;  // V must stay positive; vanishing limit
    const auto all = symmetric_deployment(10);
    CHECK(aoi::cost_finite(all, 0, cfg2) ==
          doctest::Approx(aoi::local_power(reference_policy(), reference_profile())).epsilon(1e-9));
  }
  SUBCASE("symmetric two-device system has equal costs") {
    SystemConfig cfg2 = cfg;
    cfg2.num_ues = 2;
    const auto all = symmetric_deployment(2);
    CHECK(aoi::cost_finite(all, 0, cfg2) ==
          doctest::Approx(aoi::cost_finite(all, 1, cfg2)).epsilon(1e-14));
  }
  SUBCASE("frozen fixture at the standard symmetric point") {
    const auto all = symmetric_deployment(10);
    CHECK(aoi::cost_finite(all, 0, cfg) ==
          doctest::Approx(545.3440567115108).epsilon(1e-10));
  }
}

TEST_CASE("mean-field cost") {
  const auto cfg = reference_system();
  SUBCASE("empty field with all-local policy decomposes into single-device chains") {
    Policy pol = reference_policy();
    for (TaskClass c : kTaskClasses) pol.p[c] = 1.0;
    const double j = aoi::cost_meanfield(pol, MeanField{}, reference_profile(), cfg);
    // red collapses to 1/lambda + 1/mu0; yellow/green retain self-preemption
    // by the device's own higher-priority local tasks (pipeline-derived)
    const double d_r = 1.0 / 1.0 + 1.0 / 0.7;
    const double d_y = 6.27571028411367;
    const double d_g = 18.32124764799557;
    const double expected = aoi::local_power(pol, reference_profile()) +
                            10.0 * (20.0 * d_r + 5.0 * d_y + 2.0 * d_g);
    CHECK(j == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("monotone in the scalarization weight") {
    MeanField rho;
    rho.rho[TaskClass::Red] = 0.04;
    rho.rho[TaskClass::Yellow] = 0.15;
    rho.rho[TaskClass::Green] = 0.24;
    SystemConfig lo = cfg, hi = cfg;
    lo.scalarization = 5.0;
    hi.scalarization = 15.0;
    CHECK(aoi::cost_meanfield(reference_policy(), rho, reference_profile(), lo) <
          aoi::cost_meanfield(reference_policy(), rho, reference_profile(), hi));
  }
  SUBCASE("frozen fixture with the field induced by the symmetric policy") {
    // single type: the mean-field cost at rho = Psi2(policy) coincides with
    // the finite-population symmetric cost
    MeanField rho;
    rho.rho[TaskClass::Red] = 0.04;
    rho.rho[TaskClass::Yellow] = 0.15;
    rho.rho[TaskClass::Green] = 0.24;
    CHECK(aoi::cost_meanfield(reference_policy(), rho, reference_profile(), cfg) ==
          doctest::Approx(545.3440567115108).epsilon(1e-10));
  }
}
