#include "mecmfg/cost.hpp"

#include <cmath>
#include <stdexcept>

#include "mecmfg/chains.hpp"

namespace mecmfg::aoi {

PerClass<double> busy_fractions(const Policy& policy, const UEProfile& profile) {
  PerClass<double> t;
  for (TaskClass c : kTaskClasses) {
    const double local_rate = profile.arrival_rates[c] * policy.p[c];
    if (local_rate == 0.0 && policy.mu0 == 0.0) {
      t[c] = 0.0;
    } else {
      t[c] = local_rate / (local_rate + policy.mu0);
    }
  }
  return t;
}

double local_power(const Policy& policy, const UEProfile& profile) {
  const auto t = busy_fractions(policy, profile);
  const double tr = t[TaskClass::Red];
  const double ty = t[TaskClass::Yellow];
  const double tg = t[TaskClass::Green];
  const double bracket = tr + (1 - tr) * ty + (1 - tr) * (1 - ty) * tg;
  return bracket * profile.eta * policy.mu0 * policy.mu0 * policy.mu0;
}

ExogenousRates exogenous_rates_finite(
    const std::vector<std::pair<Policy, UEProfile>>& all_policies, int self_index) {
  const int n = static_cast<int>(all_policies.size());
  if (self_index < 0 || self_index >= n) {
    throw std::out_of_range("exogenous_rates_finite: self_index out of range");
  }
  ExogenousRates rates;
  double offload_red_all = 0.0;     // every UE's offloaded red rate
  double offload_yellow_all = 0.0;  // every UE's offloaded yellow rate
  for (int j = 0; j < n; ++j) {
    const auto& [pol, prof] = all_policies[static_cast<std::size_t>(j)];
    for (TaskClass c : kTaskClasses) {
      const double offloaded = prof.arrival_rates[c] * (1.0 - pol.p[c]);
      if (j != self_index) rates.lambda_minus[c] += offloaded;
    }
    offload_red_all += prof.arrival_rates[TaskClass::Red] * (1.0 - pol.p[TaskClass::Red]);
    offload_yellow_all +=
        prof.arrival_rates[TaskClass::Yellow] * (1.0 - pol.p[TaskClass::Yellow]);
  }
  rates.lambda_high_total[TaskClass::Yellow] = offload_red_all;
  rates.lambda_high_total[TaskClass::Green] = offload_red_all + offload_yellow_all;

  const auto& [self_pol, self_prof] = all_policies[static_cast<std::size_t>(self_index)];
  rates.lambda_high_local[TaskClass::Yellow] =
      self_prof.arrival_rates[TaskClass::Red] * self_pol.p[TaskClass::Red];
  rates.lambda_high_local[TaskClass::Green] =
      self_prof.arrival_rates[TaskClass::Red] * self_pol.p[TaskClass::Red] +
      self_prof.arrival_rates[TaskClass::Yellow] * self_pol.p[TaskClass::Yellow];
  return rates;
}

ExogenousRates exogenous_rates_meanfield(const MeanField& rho, int num_ues, double mu,
                                         const Policy& self_policy,
                                         const UEProfile& self_profile) {
  if (num_ues < 1) throw std::invalid_argument("exogenous_rates_meanfield: N < 1");
  ExogenousRates rates;
  for (TaskClass c : kTaskClasses) {
    rates.lambda_minus[c] = (num_ues - 1) * mu * rho.rho[c];
  }
  rates.lambda_high_total[TaskClass::Yellow] = num_ues * mu * rho.rho[TaskClass::Red];
  rates.lambda_high_total[TaskClass::Green] =
      num_ues * mu * (rho.rho[TaskClass::Red] + rho.rho[TaskClass::Yellow]);
  rates.lambda_high_local[TaskClass::Yellow] =
      self_profile.arrival_rates[TaskClass::Red] * self_policy.p[TaskClass::Red];
  rates.lambda_high_local[TaskClass::Green] =
      self_profile.arrival_rates[TaskClass::Red] * self_policy.p[TaskClass::Red] +
      self_profile.arrival_rates[TaskClass::Yellow] * self_policy.p[TaskClass::Yellow];
  return rates;
}

AoiBreakdown weighted_aoi(const ExogenousRates& rates, const Policy& policy,
                          const UEProfile& profile, const SystemConfig& config) {
  AoiBreakdown result;
  result.per_class[TaskClass::Red] = red_aoi_closed_form(
      profile.arrival_rates[TaskClass::Red], policy.p[TaskClass::Red],
      rates.lambda_minus[TaskClass::Red], policy.mu0, config.es_rate);
  for (TaskClass c : {TaskClass::Yellow, TaskClass::Green}) {
    result.per_class[c] =
        yg_aoi(profile.arrival_rates[c], policy.p[c], rates.lambda_minus[c],
               rates.lambda_high_total[c], rates.lambda_high_local[c], policy.mu0,
               config.es_rate);
  }
  result.weighted = 0.0;
  for (TaskClass c : kTaskClasses) {
    result.weighted += config.aoi_weights[c] * result.per_class[c];
  }
  return result;
}

double cost_finite(const std::vector<std::pair<Policy, UEProfile>>& all_policies,
                   int self_index, const SystemConfig& config) {
  const auto rates = exogenous_rates_finite(all_policies, self_index);
  const auto& [policy, profile] = all_policies[static_cast<std::size_t>(self_index)];
  const auto aoi = weighted_aoi(rates, policy, profile, config);
  return local_power(policy, profile) + config.scalarization * aoi.weighted;
}

double cost_meanfield(const Policy& policy, const MeanField& rho,
                      const UEProfile& profile, const SystemConfig& config) {
  const auto rates =
      exogenous_rates_meanfield(rho, config.num_ues, config.es_rate, policy, profile);
  const auto aoi = weighted_aoi(rates, policy, profile, config);
  return local_power(policy, profile) + config.scalarization * aoi.weighted;
}

}  // namespace mecmfg::aoi
