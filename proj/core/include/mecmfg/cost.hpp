#pragma once

// Cost-side operations of the offloading game: local busy fractions and
// power, exogenous rates in the finite-population and mean-field regimes,
// per-class and weighted AoI, and the two cost functionals.

#include <utility>
#include <vector>

#include "mecmfg/types.hpp"

namespace mecmfg::aoi {

/// Per-class local busy fraction t_a = lambda_a p_a / (lambda_a p_a + mu0),
/// with t_a = 0 when both the local arrival rate and mu0 vanish.
PerClass<double> busy_fractions(const Policy& policy, const UEProfile& profile);

/// Average local power: occupancy bracket times eta * mu0^3.
double local_power(const Policy& policy, const UEProfile& profile);

/// Exogenous rates seen by UE `self_index` in a finite deployment. Same-class
/// rates exclude the UE itself; higher-priority shared-server rates sum over
/// every UE including self; higher-priority local rates are the UE's own.
ExogenousRates exogenous_rates_finite(
    const std::vector<std::pair<Policy, UEProfile>>& all_policies, int self_index);

/// Exogenous rates under the mean-field substitution: same-class rates
/// (N-1) mu rho_a, higher-priority shared rates N mu rho (cumulated above the
/// class), own local rates as in the finite case.
ExogenousRates exogenous_rates_meanfield(const MeanField& rho, int num_ues, double mu,
                                         const Policy& self_policy,
                                         const UEProfile& self_profile);

/// Per-class AoI (red via closed form, yellow/green via the chain pipeline)
/// plus the weighted sum.
AoiBreakdown weighted_aoi(const ExogenousRates& rates, const Policy& policy,
                          const UEProfile& profile, const SystemConfig& config);

/// Finite-population cost of UE `self_index`: power plus V times weighted AoI
/// under exogenous_rates_finite.
double cost_finite(const std::vector<std::pair<Policy, UEProfile>>& all_policies,
                   int self_index, const SystemConfig& config);

/// Generic-UE mean-field cost: power plus V times weighted AoI under
/// exogenous_rates_meanfield.
double cost_meanfield(const Policy& policy, const MeanField& rho,
                      const UEProfile& profile, const SystemConfig& config);

}  // namespace mecmfg::aoi
