#include "mecmfg/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mecmfg/cost.hpp"

namespace mecmfg::mfg {

namespace {

double lower_bound(int i) { return i < 3 ? 0.0 : kMu0Floor; }
double upper_bound(int i, double f_max) { return i < 3 ? 1.0 : f_max; }

double clamp_coord(double v, int i, double f_max) {
  return std::clamp(v, lower_bound(i), upper_bound(i, f_max));
}

std::string describe(const PolicyVector& x) {
  std::ostringstream os;
  os << "(p_r=" << x[0] << ", p_y=" << x[1] << ", p_g=" << x[2] << ", mu0=" << x[3]
     << ")";
  return os.str();
}

double checked_eval(const CostFn& cost, const PolicyVector& x) {
  const double value = cost(x);
  if (!std::isfinite(value)) {
    throw NonFiniteError("cost evaluation returned a non-finite value at " + describe(x));
  }
  return value;
}

}  // namespace

PolicyVector PolicyVector::from_policy(const Policy& p) {
  PolicyVector x;
  x[0] = p.p[TaskClass::Red];
  x[1] = p.p[TaskClass::Yellow];
  x[2] = p.p[TaskClass::Green];
  x[3] = p.mu0;
  return x;
}

Policy PolicyVector::to_policy() const {
  Policy p;
  p.p[TaskClass::Red] = coords[0];
  p.p[TaskClass::Yellow] = coords[1];
  p.p[TaskClass::Green] = coords[2];
  p.mu0 = coords[3];
  return p;
}

PolicyVector project(const PolicyVector& x, double f_max) {
  PolicyVector out = x;
  for (int i = 0; i < 4; ++i) {
    out[i] = clamp_coord(out[i], i, f_max);
  }
  return out;
}

double fd_partial(const CostFn& cost, const PolicyVector& x, int i, double h,
                  double f_max) {
  if (!(h > 0.0)) throw std::invalid_argument("fd_partial: h must be positive");
  const double lo = lower_bound(i);
  const double hi = upper_bound(i, f_max);
  h = std::min(h, (hi - lo) / 2.0);
  if (!(h > 0.0)) return 0.0;  // degenerate box
  const bool can_up = x[i] + h <= hi;
  const bool can_down = x[i] - h >= lo;
  PolicyVector up = x, down = x;
  if (can_up && can_down) {
    up[i] += h;
    down[i] -= h;
    return (checked_eval(cost, up) - checked_eval(cost, down)) / (2.0 * h);
  }
  if (can_up) {
    up[i] += h;
    return (checked_eval(cost, up) - checked_eval(cost, x)) / h;
  }
  down[i] -= h;
  return (checked_eval(cost, x) - checked_eval(cost, down)) / h;
}

PolicyVector best_response(const CostFn& cost, const PolicyVector& x0,
                           const SolverSettings& settings, double f_max,
                           std::vector<double>* cost_trace) {
  PolicyVector x = project(x0, f_max);
  double fx = checked_eval(cost, x);
  bool any_accepted = false;

  for (int i = 0; i < 4; ++i) {
    for (int iter = 0; iter < settings.max_inner; ++iter) {
      const double g = fd_partial(cost, x, i, settings.fd_step, f_max);
      const double old = x[i];
      double step = settings.gamma_step;
      bool accepted = false;
      for (int bt = 0; bt <= 20; ++bt) {
        PolicyVector cand = x;
        cand[i] = clamp_coord(old - step * g, i, f_max);
        if (cand[i] == old) break;  // projected step is a no-op
        const double fc = checked_eval(cost, cand);
        if (fc <= fx) {
          x = cand;
          fx = fc;
          accepted = true;
          any_accepted = true;
          if (cost_trace != nullptr) cost_trace->push_back(fc);
          break;
        }
        step /= 2.0;
      }
      if (!accepted) break;
      if (std::abs(x[i] - old) <= settings.eps_policy) break;
    }
  }

  if (!any_accepted) {
    // projected gradient: components blocked by an active bound do not count
    double pg = 0.0;
    for (int i = 0; i < 4; ++i) {
      const double g = fd_partial(cost, x, i, settings.fd_step, f_max);
      const double lo = lower_bound(i);
      const double hi = upper_bound(i, f_max);
      if ((x[i] <= lo && g > 0.0) || (x[i] >= hi && g < 0.0)) continue;
      pg = std::max(pg, std::abs(g));
    }
    if (pg > 10.0 * settings.eps_policy) {
      throw StalledDescentError(
          "no coordinate step decreases the cost although the projected gradient is " +
          std::to_string(pg) + " at " + describe(x) + "; check gamma_step/fd_step");
    }
  }
  return x;
}

PolicyVector minimize_policy(const CostFn& cost, const PolicyVector& x0,
                             const SolverSettings& settings, double f_max) {
  PolicyVector x = project(x0, f_max);
  for (int pass = 0; pass < settings.max_outer; ++pass) {
    const PolicyVector next = best_response(cost, x, settings, f_max);
    double move = 0.0;
    for (int i = 0; i < 4; ++i) move = std::max(move, std::abs(next[i] - x[i]));
    x = next;
    if (move <= settings.eps_policy) break;
  }
  return x;
}

MeanField mf_from_policies(const std::vector<Policy>& policies,
                           const std::vector<UEProfile>& profiles, double mu) {
  if (policies.size() != profiles.size()) {
    throw std::invalid_argument("mf_from_policies: policies/profiles size mismatch");
  }
  if (!(mu > 0.0)) throw std::invalid_argument("mf_from_policies: mu must be positive");
  MeanField field;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (TaskClass c : kTaskClasses) {
      field.rho[c] += profiles[i].weight * profiles[i].arrival_rates[c] *
                      (1.0 - policies[i].p[c]) / mu;
    }
  }
  return field;
}

EquilibriumResult solve_mfe(const SystemConfig& config, const SolverSettings& settings,
                            const MeanField& initial_rho,
                            const std::vector<Policy>& initial_policies) {
  if (initial_policies.size() != config.profiles.size()) {
    throw std::invalid_argument("solve_mfe: one initial policy per profile required");
  }
  if (!(settings.gamma_mf > 0.0 && settings.gamma_mf <= 1.0)) {
    throw std::invalid_argument("solve_mfe: gamma_mf must lie in (0, 1]");
  }

  EquilibriumResult result;
  result.policies = initial_policies;
  for (std::size_t i = 0; i < result.policies.size(); ++i) {
    const PolicyVector x = project(PolicyVector::from_policy(result.policies[i]),
                                   config.profiles[i].f_max);
    result.policies[i] = x.to_policy();
  }
  MeanField rho = initial_rho;

  for (int k = 1; k <= settings.max_outer; ++k) {
    std::vector<double> costs(config.profiles.size(), 0.0);
    for (std::size_t i = 0; i < config.profiles.size(); ++i) {
      const UEProfile& profile = config.profiles[i];
      const CostFn cost = [&](const PolicyVector& x) {
        return mecmfg::aoi::cost_meanfield(x.to_policy(), rho, profile, config);
      };
      const PolicyVector x = best_response(
          cost, PolicyVector::from_policy(result.policies[i]), settings, profile.f_max);
      result.policies[i] = x.to_policy();
      costs[i] = checked_eval(cost, x);
    }

    const MeanField target =
        mf_from_policies(result.policies, config.profiles, config.es_rate);
    MeanField next;
    double residual = 0.0;
    for (TaskClass c : kTaskClasses) {
      next.rho[c] =
          (1.0 - settings.gamma_mf) * rho.rho[c] + settings.gamma_mf * target.rho[c];
      residual = std::max(residual, std::abs(next.rho[c] - rho.rho[c]));
    }
    rho = next;
    result.outer_iterations = k;
    result.mf_residual = residual;
    result.trace.push_back(TracePoint{k, rho, result.policies, costs});
    if (residual <= settings.eps_rho) {
      result.converged = true;
      break;
    }
  }
  result.mean_field = rho;
  return result;
}

double exploitability(const EquilibriumResult& result, const SystemConfig& config,
                      const SolverSettings& settings) {
  if (result.policies.size() != config.profiles.size()) {
    throw std::invalid_argument("exploitability: result does not match config profiles");
  }
  const auto counts = apportion_ues(config.profiles, config.num_ues);

  std::vector<std::pair<Policy, UEProfile>> deployment;
  deployment.reserve(static_cast<std::size_t>(config.num_ues));
  std::vector<int> representative(config.profiles.size(), -1);
  for (std::size_t t = 0; t < config.profiles.size(); ++t) {
    for (int k = 0; k < counts[t]; ++k) {
      if (representative[t] < 0) representative[t] = static_cast<int>(deployment.size());
      deployment.emplace_back(result.policies[t], config.profiles[t]);
    }
  }

  double gap = 0.0;
  for (std::size_t t = 0; t < config.profiles.size(); ++t) {
    const int self = representative[t];
    if (self < 0) continue;  // type received no seat
    const double f_max = config.profiles[t].f_max;
    const double j_eq = mecmfg::aoi::cost_finite(deployment, self, config);
    const CostFn deviation_cost = [&](const PolicyVector& x) {
      auto trial = deployment;
      trial[static_cast<std::size_t>(self)].first = x.to_policy();
      return mecmfg::aoi::cost_finite(trial, self, config);
    };
    const PolicyVector dev = minimize_policy(
        deviation_cost, PolicyVector::from_policy(result.policies[t]), settings, f_max);
    const double j_dev = checked_eval(deviation_cost, dev);
    gap = std::max(gap, j_eq - j_dev);
  }
  return gap;
}

}  // namespace mecmfg::mfg
