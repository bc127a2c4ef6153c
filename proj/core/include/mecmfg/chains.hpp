#pragma once

// Builders for the two concrete age-of-information chains of the offloading
// model, seen from one device: the top-priority (red) 3-state chain and the
// mid/low-priority (yellow/green) 7-state chain. Both track three age
// coordinates: x0 at the device, x1 at the local processor, x2 at the shared
// edge server.

#include <stdexcept>
#include <vector>

#include "mecmfg/shs.hpp"

namespace mecmfg::aoi {

/// Chain has no unique recurrent class reachable from its start state.
class DegenerateChainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Requested a red average AoI with no service path (p_r = 1 and mu0 = 0).
class NoServicePathError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReducedChain {
  shs::CtmcSpec spec;
  std::vector<int> original_states;  // kept state indices, ascending
};

/// Restricts a chain to the closed communicating class reachable from
/// `start_state`, dropping transient states (their stationary mass is zero).
/// Throws DegenerateChainError if more than one closed class is reachable.
ReducedChain restrict_to_recurrent(const shs::CtmcSpec& spec, int start_state = 0);

/// Red-task chain. 3 states when all rates are positive; boundary parameter
/// values (p_r in {0,1}, lambda_minus_r = 0) yield the reduced reachable
/// chain instead of an error. Unit growth on all coordinates.
shs::CtmcSpec build_red_chain(double lambda_r, double p_r, double lambda_minus_r,
                              double mu0, double mu);

/// Yellow/green-task chain; `lambda_b`/`p_b` are the tracked class's own rate
/// and local probability, `lambda_e` the same-class exogenous rate,
/// `lambda_high_total` all-device higher-priority traffic at the shared
/// server, `lambda_high_local` the device's own higher-priority local rate.
shs::CtmcSpec build_yg_chain(double lambda_b, double p_b, double lambda_e,
                             double lambda_high_total, double lambda_high_local,
                             double mu0, double mu);

/// Full transition tables before zero-rate pruning and recurrent-class
/// reduction; exposed so the assembled balance systems can be compared with
/// long-hand transcriptions (see explicit_forms.hpp).
shs::CtmcSpec red_chain_full(double lambda_r, double p_r, double lambda_minus_r,
                             double mu0, double mu);
shs::CtmcSpec yg_chain_full(double lambda_b, double p_b, double lambda_e,
                            double lambda_high_total, double lambda_high_local,
                            double mu0, double mu);

/// Closed-form red average AoI, algebraically identical to running the
/// solver pipeline on build_red_chain (see tests). Requires a service path:
/// throws NoServicePathError when p_r = 1 and mu0 = 0.
double red_aoi_closed_form(double lambda_r, double p_r, double lambda_minus_r,
                           double mu0, double mu);

/// Yellow/green average AoI via the generic pipeline (stationary solve,
/// moment solve, column-0 sum). No closed form exists at this size; the
/// linear-solve pipeline is the definition.
double yg_aoi(double lambda_b, double p_b, double lambda_e, double lambda_high_total,
              double lambda_high_local, double mu0, double mu);

/// Red average AoI via the generic pipeline (used to cross-check the closed
/// form; prefer red_aoi_closed_form in hot paths).
double red_aoi_pipeline(double lambda_r, double p_r, double lambda_minus_r, double mu0,
                        double mu);

}  // namespace mecmfg::aoi
