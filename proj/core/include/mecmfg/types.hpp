#pragma once

// Shared domain types for the MEC offloading model: task classes, device
// profiles, policies and the aggregate quantities exchanged between the
// analytic, game-theoretic and simulation layers.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mecmfg {

/// Task urgency levels. Red preempts Yellow preempts Green.
enum class TaskClass : int { Red = 0, Yellow = 1, Green = 2 };

inline constexpr std::array<TaskClass, 3> kTaskClasses{
    TaskClass::Red, TaskClass::Yellow, TaskClass::Green};

inline constexpr int class_index(TaskClass c) { return static_cast<int>(c); }

/// Service priority; strictly higher values preempt lower ones.
inline constexpr int priority_of(TaskClass c) { return 2 - class_index(c); }

const char* class_name(TaskClass c);

/// Fixed-size map TaskClass -> T.
template <typename T>
struct PerClass {
  std::array<T, 3> values{};

  T& operator[](TaskClass c) { return values[static_cast<std::size_t>(class_index(c))]; }
  const T& operator[](TaskClass c) const {
    return values[static_cast<std::size_t>(class_index(c))];
  }

  friend bool operator==(const PerClass&, const PerClass&) = default;
};

using ClassRates = PerClass<double>;

/// Lower bound applied to the local frequency by the optimizer-facing APIs so
/// that chains with local arrivals never lose their only service path.
inline constexpr double kMu0Floor = 1e-6;

/// Device type: per-class arrival rates, power coefficient, frequency cap and
/// population weight.
struct UEProfile {
  std::string name;
  ClassRates arrival_rates{};  // tasks per unit time, all > 0
  double eta = 1.0;            // power per cubed frequency
  double f_max = 1.0;          // local frequency cap
  double weight = 1.0;         // population mass; weights sum to 1 over a set
};

/// One device's decision: per-class local-service probabilities and the local
/// operating frequency.
struct Policy {
  PerClass<double> p{};  // each in [0, 1]
  double mu0 = 0.0;      // in [0, f_max]
};

/// System-wide constants of the offloading game.
struct SystemConfig {
  int num_ues = 1;            // N >= 1
  double es_rate = 1.0;       // shared-server service rate, > 0
  double scalarization = 1.0; // freshness-vs-power tradeoff, > 0
  PerClass<double> aoi_weights{{1.0, 1.0, 1.0}};
  std::vector<UEProfile> profiles;
};

/// Exogenous arrival rates seen by one device's chains.
///
/// lambda_minus[a]      same-class traffic from other devices at the shared
///                      server.
/// lambda_high_total[a] all-device higher-priority traffic at the shared
///                      server (zero for Red, which has nothing above it).
/// lambda_high_local[a] the device's own higher-priority local traffic
///                      (zero for Red).
struct ExogenousRates {
  PerClass<double> lambda_minus{};
  PerClass<double> lambda_high_total{};
  PerClass<double> lambda_high_local{};
};

/// Aggregate shared-server loading per class (dimensionless).
struct MeanField {
  PerClass<double> rho{};
};

/// Per-class and weighted average age of information.
struct AoiBreakdown {
  PerClass<double> per_class{};
  double weighted = 0.0;
};

/// Splits N seats among profiles proportionally to their weights (largest
/// remainder). Every profile with positive weight gets at least a fair
/// rounding; the counts sum to N exactly.
std::vector<int> apportion_ues(const std::vector<UEProfile>& profiles, int num_ues);

}  // namespace mecmfg
