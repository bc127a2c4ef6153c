#pragma once

// Mean-field equilibrium solver: damped fixed-point iteration over the
// aggregate loading, with a projected block-coordinate descent best response
// per device type. Gradients are central finite differences (one-sided at
// the box boundary).

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mecmfg/types.hpp"

namespace mecmfg::mfg {

struct SolverSettings {
  double eps_rho = 1e-6;     // mean-field convergence tolerance
  double eps_policy = 1e-6;  // per-coordinate convergence tolerance
  double gamma_mf = 0.5;     // mean-field damping, in (0, 1]
  double gamma_step = 1e-2;  // gradient step size
  double fd_step = 1e-5;     // finite-difference half-width
  int max_outer = 500;
  int max_inner = 200;
  std::uint64_t rng_seed = 1;
};

/// Policy as an ordered coordinate vector (p_r, p_y, p_g, mu0).
struct PolicyVector {
  std::array<double, 4> coords{};

  double& operator[](int i) { return coords[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return coords[static_cast<std::size_t>(i)]; }

  static PolicyVector from_policy(const Policy& p);
  Policy to_policy() const;

  friend bool operator==(const PolicyVector&, const PolicyVector&) = default;
};

using CostFn = std::function<double(const PolicyVector&)>;

/// No coordinate can decrease the cost although the projected gradient is
/// still large; the step size is misconfigured for this cost surface.
class StalledDescentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A cost evaluation returned a non-finite value; the message names the
/// offending iterate.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Coordinate-wise clamp onto [0,1]^3 x [mu0 floor, f_max].
PolicyVector project(const PolicyVector& x, double f_max);

/// Central-difference partial derivative of `cost` along coordinate `i`,
/// falling back to a one-sided difference when x +- h e_i leaves the box.
double fd_partial(const CostFn& cost, const PolicyVector& x, int i, double h,
                  double f_max);

/// One block-coordinate descent pass: coordinates in order (p_r, p_y, p_g,
/// mu0), each iterated with projected gradient steps until the move is below
/// eps_policy or max_inner is hit. Steps that would increase the cost are
/// backtracked (halving, up to 20 times); the returned point never costs more
/// than the start. Accepted per-step costs are appended to `cost_trace` when
/// given.
PolicyVector best_response(const CostFn& cost, const PolicyVector& x0,
                           const SolverSettings& settings, double f_max,
                           std::vector<double>* cost_trace = nullptr);

/// Repeats best_response passes until the policy stops moving (max-norm below
/// eps_policy) or max_outer passes; used where a fully optimized reply is
/// wanted rather than one sweep.
PolicyVector minimize_policy(const CostFn& cost, const PolicyVector& x0,
                             const SolverSettings& settings, double f_max);

/// Consistency map: rho_a = (1/mu) E_phi[lambda_a (1 - p_a)].
MeanField mf_from_policies(const std::vector<Policy>& policies,
                           const std::vector<UEProfile>& profiles, double mu);

struct TracePoint {
  int iteration = 0;
  MeanField rho;                 // after the damped update
  std::vector<Policy> policies;  // per profile
  std::vector<double> costs;     // mean-field cost per profile at the rho the
                                 // best response was computed against
};

struct EquilibriumResult {
  std::vector<Policy> policies;  // aligned with config.profiles
  MeanField mean_field;
  double mf_residual = 0.0;  // last max-norm change of rho
  int outer_iterations = 0;
  std::vector<TracePoint> trace;
  bool converged = false;
};

/// Damped fixed-point iteration: per type a best-response pass against the
/// current mean field, then rho <- (1-gamma_mf) rho + gamma_mf Psi2(policies),
/// stopping when the rho update falls below eps_rho.
EquilibriumResult solve_mfe(const SystemConfig& config, const SolverSettings& settings,
                            const MeanField& initial_rho,
                            const std::vector<Policy>& initial_policies);

/// Best-deviation gap of the equilibrium policies deployed symmetrically to
/// config.num_ues devices: max over types of J_self(at equilibrium) minus
/// J_self(best finite-population deviation, others held fixed). Nonnegative
/// up to the descent tolerance; smaller means closer to a finite Nash point.
double exploitability(const EquilibriumResult& result, const SystemConfig& config,
                      const SolverSettings& settings);

}  // namespace mecmfg::mfg
