#pragma once

// Event-driven Monte Carlo simulator of the full N-device system: Poisson
// arrivals per device and class, Bernoulli routing to the local processor or
// the shared edge server, LCFS service with priority preemption at every
// server, exponential service times. An arrival enters service iff its class
// is at least as urgent as the packet in service (same class preempts, LCFS);
// displaced and blocked packets are discarded, matching the analytic chains.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mecmfg/types.hpp"

namespace mecmfg::des {

class InvalidConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimConfig {
  SystemConfig system;
  std::vector<int> ue_profile;   // profile index per UE
  std::vector<Policy> policies;  // one per UE
  std::optional<double> horizon;              // simulated-time stopping rule
  std::optional<std::uint64_t> event_budget;  // event-count stopping rule
  double warmup_fraction = 0.1;  // in [0, 1)
  std::uint64_t rng_seed = 1;
  int batches = 20;  // batch-means batches for confidence half-widths
};

/// Symmetric deployment helper: one policy per profile, seats apportioned by
/// profile weight.
SimConfig make_symmetric_config(const SystemConfig& system,
                                const std::vector<Policy>& per_profile_policies);

struct ClassStats {
  double aoi = 0.0;            // time-average age
  double aoi_halfwidth = 0.0;  // 95% batch-means half-width
  double busy_fraction = 0.0;  // local processor busy on this class
  double busy_halfwidth = 0.0;
  std::uint64_t delivered = 0;  // completions credited to this device
  std::uint64_t preempted = 0;  // discarded while in service
  std::uint64_t blocked = 0;    // discarded on arrival (server busy with
                                // strictly higher class)
};

struct UeStats {
  PerClass<ClassStats> per_class{};
  double busy_any = 0.0;  // local processor busy on any class
  double power = 0.0;     // eta * mu0^3 * busy_any
};

struct SimStats {
  std::vector<UeStats> ues;
  PerClass<double> es_busy_fraction{};
  double sim_time = 0.0;   // total simulated time
  double stat_time = 0.0;  // measured span after warmup
  std::uint64_t events = 0;
};

/// Mean and standard error over independent replications (seed, seed+1, ...).
struct ReplicationSummary {
  SimStats mean;
  SimStats std_error;
  int replications = 0;
};

SimStats simulate(const SimConfig& config);

/// Runs `replications` independent seeds and aggregates; `jobs` > 1 runs them
/// on a thread pool (results are independent of scheduling).
ReplicationSummary replicate(const SimConfig& config, int replications, int jobs = 1);

}  // namespace mecmfg::des
