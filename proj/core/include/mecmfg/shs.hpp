#pragma once

// Generic solver for piecewise-linear stochastic hybrid systems: a finite
// CTMC whose continuous age coordinates grow at unit (or zero) rate and are
// remapped linearly at every jump. Produces the stationary distribution, the
// stationary conditional age moments and the average age of information.

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mecmfg::shs {

/// One output coordinate of a jump reset map: either reset to zero or copy a
/// source coordinate. A reset map is one such assignment per age coordinate,
/// i.e. a binary matrix with at most one unit entry per column.
struct ResetOp {
  static constexpr int kZero = -1;
  int source = kZero;

  static ResetOp zero() { return ResetOp{}; }
  static ResetOp copy(int j) { return ResetOp{j}; }
  bool is_zero() const { return source == kZero; }

  friend bool operator==(const ResetOp&, const ResetOp&) = default;
};

using ResetMap = std::vector<ResetOp>;  // one entry per age coordinate

struct TransitionSpec {
  int source_state = 0;
  double rate = 0.0;  // > 0; zero-rate transitions must be omitted
  int target_state = 0;
  ResetMap reset;
};

struct CtmcSpec {
  int num_states = 0;  // c >= 1
  int age_dim = 0;     // number of age coordinates (>= 1)
  std::vector<std::vector<int>> growth;  // c rows of age_dim entries in {0,1}
  std::vector<TransitionSpec> transitions;
};

struct StationaryDistribution {
  Eigen::VectorXd probabilities;  // length c, entries >= 0, sums to 1
};

/// Stationary conditional age moments: row s holds E[x_k ; state == s].
struct ConditionalMoments {
  Eigen::MatrixXd moments;  // c x age_dim, entries >= 0
};

struct SolverOptions {
  double stationary_residual_tol = 1e-12;
  double moment_residual_tol = 1e-9;
};

class InvalidSpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Balance system is rank-deficient beyond the single expected redundancy;
/// the chain is reducible or otherwise malformed.
class SingularChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Moment system is not uniquely solvable; the age process has no stationary
/// first moment (or the spec is wrong).
class SingularMomentSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks all CtmcSpec invariants; violations are returned as data, one
/// message each, empty iff the spec is valid. Irreducibility is checked via
/// strongly connected components of the transition graph.
std::vector<std::string> validate_spec(const CtmcSpec& spec);

/// Solves the global balance equations with the last balance row replaced by
/// the normalization row. Pre: spec passes validate_spec.
StationaryDistribution solve_stationary(const CtmcSpec& spec,
                                        const SolverOptions& options = {});

/// Solves the stationary conditional-moment balance system, one dense linear
/// solve in c * age_dim unknowns. Pre: pi is solve_stationary(spec).
ConditionalMoments solve_conditional_moments(const CtmcSpec& spec,
                                             const StationaryDistribution& pi,
                                             const SolverOptions& options = {});

/// Average AoI: the sum of coordinate-0 moments over all states.
double average_aoi(const ConditionalMoments& moments);

/// Generator matrix Q (self-loops cancel); pi' Q = 0 at stationarity.
Eigen::MatrixXd generator_matrix(const CtmcSpec& spec);

/// Coefficient matrix B of the stationary balance system B pi = 0, row s:
/// (total outflow of s) pi_s - sum of inflow rates. Exposed so alternative
/// transcriptions of the same chain can be compared coefficient by
/// coefficient.
Eigen::MatrixXd stationary_balance_matrix(const CtmcSpec& spec);

/// Coefficient matrix M of the moment balance system M v = u .* pi, unknowns
/// flattened row-major as (state, coordinate).
Eigen::MatrixXd moment_balance_matrix(const CtmcSpec& spec);

/// Max-norm of pi' Q.
double stationary_residual(const CtmcSpec& spec, const StationaryDistribution& pi);

/// Largest relative row residual of the moment balance system.
double moment_residual(const CtmcSpec& spec, const StationaryDistribution& pi,
                       const ConditionalMoments& v);

}  // namespace mecmfg::shs
