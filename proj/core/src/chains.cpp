#include "mecmfg/chains.hpp"

#include <algorithm>
#include <cmath>

namespace mecmfg::aoi {

namespace {

using shs::CtmcSpec;
using shs::ResetMap;
using shs::ResetOp;
using shs::TransitionSpec;

ResetMap rmap(int k0, int k1, int k2) {
  auto op = [](int k) { return k < 0 ? ResetOp::zero() : ResetOp::copy(k); };
  return ResetMap{op(k0), op(k1), op(k2)};
}

constexpr int Z = -1;

void add(CtmcSpec& spec, int src, double rate, int dst, ResetMap reset) {
  spec.transitions.push_back(TransitionSpec{src, rate, dst, std::move(reset)});
}

CtmcSpec make_spec(int num_states) {
  CtmcSpec spec;
  spec.num_states = num_states;
  spec.age_dim = 3;
  spec.growth.assign(static_cast<std::size_t>(num_states), {1, 1, 1});
  return spec;
}

void check_rate(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(name) + " must be nonnegative and finite");
  }
}

void check_prob(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

ReducedChain restrict_to_recurrent(const CtmcSpec& spec, int start_state) {
  const int n = spec.num_states;
  if (start_state < 0 || start_state >= n) {
    throw std::invalid_argument("restrict_to_recurrent: start state out of range");
  }

  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& t : spec.transitions) {
    if (t.rate > 0.0 && t.source_state != t.target_state) {
      adj[static_cast<std::size_t>(t.source_state)].push_back(t.target_state);
    }
  }

  // reachable set from start
  std::vector<bool> reachable(static_cast<std::size_t>(n), false);
  std::vector<int> stack{start_state};
  reachable[static_cast<std::size_t>(start_state)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(u)]) {
      if (!reachable[static_cast<std::size_t>(w)]) {
        reachable[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }

  // condense: a state is in a closed class iff no path leaves its SCC.
  // Kosaraju-style double DFS would do; at n <= 7 a simple transitive check
  // per reachable state is plenty.
  auto reaches = [&](int from, int to) {
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    std::vector<int> st{from};
    seen[static_cast<std::size_t>(from)] = true;
    while (!st.empty()) {
      const int u = st.back();
      st.pop_back();
      if (u == to) return true;
      for (int w : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = true;
          st.push_back(w);
        }
      }
    }
    return false;
  };

  // closed class containing s: every state reachable from s can reach s back
  std::vector<int> closed_rep;  // one representative per closed class found
  std::vector<bool> in_closed(static_cast<std::size_t>(n), false);
  for (int s = 0; s < n; ++s) {
    if (!reachable[static_cast<std::size_t>(s)]) continue;
    bool closed = true;
    for (int w = 0; w < n && closed; ++w) {
      if (w != s && reaches(s, w) && !reaches(w, s)) closed = false;
    }
    if (closed) in_closed[static_cast<std::size_t>(s)] = true;
  }
  // group closed states into classes via mutual reachability
  std::vector<int> keep;
  for (int s = 0; s < n; ++s) {
    if (in_closed[static_cast<std::size_t>(s)]) keep.push_back(s);
  }
  if (keep.empty()) {
    throw DegenerateChainError("no closed communicating class reachable from start");
  }
  for (std::size_t i = 1; i < keep.size(); ++i) {
    if (!reaches(keep[0], keep[i]) || !reaches(keep[i], keep[0])) {
      throw DegenerateChainError(
          "multiple closed communicating classes reachable from start");
    }
  }

  std::vector<int> remap(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    remap[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  }
  ReducedChain result;
  result.original_states = keep;
  result.spec = make_spec(static_cast<int>(keep.size()));
  result.spec.age_dim = spec.age_dim;
  result.spec.growth.clear();
  for (int s : keep) {
    result.spec.growth.push_back(spec.growth[static_cast<std::size_t>(s)]);
  }
  for (const auto& t : spec.transitions) {
    const int src = remap[static_cast<std::size_t>(t.source_state)];
    const int dst = remap[static_cast<std::size_t>(t.target_state)];
    if (t.rate > 0.0 && src >= 0 && dst >= 0) {
      result.spec.transitions.push_back(TransitionSpec{src, t.rate, dst, t.reset});
    }
  }
  return result;
}

CtmcSpec red_chain_full(double lambda_r, double p_r, double lambda_minus_r, double mu0,
                        double mu) {
  if (!(lambda_r > 0.0)) throw std::invalid_argument("lambda_r must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  check_rate(mu0, "mu0");
  check_rate(lambda_minus_r, "lambda_minus_r");
  check_prob(p_r, "p_r");

  const double a = lambda_r * p_r;        // own task to local processor
  const double b = lambda_r * (1 - p_r);  // own task offloaded
  const double e = lambda_minus_r;        // other devices' same-class offloads

  // States: 0 freshest local / 2nd-freshest at ES, 1 swapped, 2 foreign
  // packet holding the ES slot (x2 then tracks the device age x0).
  CtmcSpec spec = make_spec(3);
  add(spec, 0, a, 0, rmap(0, Z, 2));
  add(spec, 0, b, 1, rmap(0, 1, Z));
  add(spec, 0, e, 2, rmap(0, 1, 0));
  add(spec, 0, mu0, 0, rmap(1, 1, 1));
  add(spec, 0, mu, 0, rmap(2, 1, 2));

  add(spec, 1, a, 0, rmap(0, Z, 2));
  add(spec, 1, b, 1, rmap(0, 1, Z));
  add(spec, 1, e, 2, rmap(0, 1, 0));
  add(spec, 1, mu0, 1, rmap(1, 1, 2));
  add(spec, 1, mu, 1, rmap(2, 2, 2));

  add(spec, 2, a, 2, rmap(0, Z, 2));
  add(spec, 2, b, 1, rmap(0, 1, Z));
  add(spec, 2, e, 2, rmap(0, 1, 0));
  add(spec, 2, mu0, 2, rmap(1, 1, 1));
  add(spec, 2, mu, 2, rmap(2, 1, 2));
  return spec;
}

CtmcSpec yg_chain_full(double lambda_b, double p_b, double lambda_e,
                       double lambda_high_total, double lambda_high_local, double mu0,
                       double mu) {
  if (!(lambda_b > 0.0)) throw std::invalid_argument("lambda_b must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  check_rate(mu0, "mu0");
  check_rate(lambda_e, "lambda_e");
  check_rate(lambda_high_total, "lambda_high_total");
  check_rate(lambda_high_local, "lambda_high_local");
  check_prob(p_b, "p_b");

  const double a = lambda_b * p_b;        // own task to local processor
  const double b = lambda_b * (1 - p_b);  // own task offloaded
  const double hl = lambda_high_local;    // own higher-priority local traffic
  const double hi = lambda_high_total;    // higher-priority traffic at the ES
  const double e = lambda_e;              // same-class exogenous offloads

  // States 0..6: (local, ES) occupancy in {freshest, 2nd freshest, higher
  // class, foreign same class}; see the state-by-state comments below.
  CtmcSpec spec = make_spec(7);

  // 0: freshest local, 2nd freshest at ES
  add(spec, 0, a, 0, rmap(0, Z, 2));
  add(spec, 0, b, 1, rmap(0, 1, Z));
  add(spec, 0, hl, 4, rmap(0, 0, 2));
  add(spec, 0, hi, 2, rmap(0, 1, 0));
  add(spec, 0, e, 3, rmap(0, 1, 0));
  add(spec, 0, mu0, 0, rmap(1, 1, 1));
  add(spec, 0, mu, 0, rmap(2, 1, 2));

  // 1: 2nd freshest local, freshest at ES
  add(spec, 1, a, 0, rmap(0, Z, 2));
  add(spec, 1, b, 1, rmap(0, 1, Z));
  add(spec, 1, hl, 4, rmap(0, 0, 2));
  add(spec, 1, hi, 2, rmap(0, 1, 0));
  add(spec, 1, e, 3, rmap(0, 1, 0));
  add(spec, 1, mu0, 1, rmap(1, 1, 2));
  add(spec, 1, mu, 1, rmap(2, 2, 2));

  // 2: freshest local, higher class at ES (blocked offloads leave no trace)
  add(spec, 2, a, 2, rmap(0, Z, 2));
  add(spec, 2, b, 2, rmap(0, 1, 2));
  add(spec, 2, hl, 5, rmap(0, 0, 2));
  add(spec, 2, hi, 2, rmap(0, 1, 0));
  add(spec, 2, e, 2, rmap(0, 1, 2));
  add(spec, 2, mu0, 2, rmap(1, 1, 1));
  add(spec, 2, mu, 3, rmap(2, 1, 2));

  // 3: freshest local, foreign same class at ES
  add(spec, 3, a, 3, rmap(0, Z, 2));
  add(spec, 3, b, 1, rmap(0, 1, Z));
  add(spec, 3, hl, 6, rmap(0, 0, 2));
  add(spec, 3, hi, 2, rmap(0, 1, 0));
  add(spec, 3, e, 3, rmap(0, 1, 0));
  add(spec, 3, mu0, 3, rmap(1, 1, 1));
  add(spec, 3, mu, 3, rmap(2, 1, 2));

  // 4: higher class local, freshest at ES
  add(spec, 4, a, 4, rmap(0, 1, 2));
  add(spec, 4, b, 4, rmap(0, 1, Z));
  add(spec, 4, hl, 4, rmap(0, 0, 2));
  add(spec, 4, hi, 5, rmap(0, 1, 0));
  add(spec, 4, e, 6, rmap(0, 1, 0));
  add(spec, 4, mu0, 1, rmap(1, 1, 2));
  add(spec, 4, mu, 4, rmap(2, 2, 2));

  // 5: higher class at both servers
  add(spec, 5, a, 5, rmap(0, 1, 2));
  add(spec, 5, b, 5, rmap(0, 1, 2));
  add(spec, 5, hl, 5, rmap(0, 0, 2));
  add(spec, 5, hi, 5, rmap(0, 1, 0));
  add(spec, 5, e, 5, rmap(0, 1, 2));
  add(spec, 5, mu0, 2, rmap(1, 1, 2));
  add(spec, 5, mu, 6, rmap(2, 1, 2));

  // 6: higher class local, foreign same class at ES
  add(spec, 6, a, 6, rmap(0, 1, 2));
  add(spec, 6, b, 4, rmap(0, 1, Z));
  add(spec, 6, hl, 6, rmap(0, 0, 2));
  add(spec, 6, hi, 5, rmap(0, 1, 0));
  add(spec, 6, e, 6, rmap(0, 1, 0));
  add(spec, 6, mu0, 1, rmap(1, 1, 2));
  add(spec, 6, mu, 6, rmap(2, 1, 2));
  return spec;
}

namespace {

CtmcSpec prune_and_reduce(const CtmcSpec& full) {
  CtmcSpec pruned = full;
  pruned.transitions.clear();
  for (const auto& t : full.transitions) {
    if (t.rate > 0.0) pruned.transitions.push_back(t);
  }
  return restrict_to_recurrent(pruned, 0).spec;
}

}  // namespace

CtmcSpec build_red_chain(double lambda_r, double p_r, double lambda_minus_r, double mu0,
                         double mu) {
  return prune_and_reduce(red_chain_full(lambda_r, p_r, lambda_minus_r, mu0, mu));
}

CtmcSpec build_yg_chain(double lambda_b, double p_b, double lambda_e,
                        double lambda_high_total, double lambda_high_local, double mu0,
                        double mu) {
  return prune_and_reduce(yg_chain_full(lambda_b, p_b, lambda_e, lambda_high_total,
                                        lambda_high_local, mu0, mu));
}

double red_aoi_closed_form(double lambda_r, double p_r, double lambda_minus_r, double mu0,
                           double mu) {
  if (!(lambda_r > 0.0)) throw std::invalid_argument("lambda_r must be positive");
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  check_rate(mu0, "mu0");
  check_rate(lambda_minus_r, "lambda_minus_r");
  check_prob(p_r, "p_r");
  if (p_r == 1.0 && mu0 == 0.0) {
    throw NoServicePathError("p_r = 1 with mu0 = 0 leaves no service path");
  }
  const double l = lambda_r;
  const double p = p_r;
  const double pb = 1.0 - p_r;
  const double e = lambda_minus_r;
  const double num = mu0 * (e + mu) * (e + mu + mu0) + l * l * l * p * pb +
                     l * l * (mu + mu0 + e * p * (2.0 - p)) +
                     l * ((mu + mu0) * (mu + mu0) + e * e * p +
                          e * (mu * (1.0 + p) + 2.0 * mu0));
  const double den = l * (mu + (l + e) * p) *
                     (mu0 * (e + mu + mu0) + l * (mu + mu0) * pb);
  return num / den;
}

double red_aoi_pipeline(double lambda_r, double p_r, double lambda_minus_r, double mu0,
                        double mu) {
  const CtmcSpec spec = build_red_chain(lambda_r, p_r, lambda_minus_r, mu0, mu);
  const auto pi = shs::solve_stationary(spec);
  const auto v = shs::solve_conditional_moments(spec, pi);
  return shs::average_aoi(v);
}

double yg_aoi(double lambda_b, double p_b, double lambda_e, double lambda_high_total,
              double lambda_high_local, double mu0, double mu) {
  const CtmcSpec spec = build_yg_chain(lambda_b, p_b, lambda_e, lambda_high_total,
                                       lambda_high_local, mu0, mu);
  const auto pi = shs::solve_stationary(spec);
  const auto v = shs::solve_conditional_moments(spec, pi);
  return shs::average_aoi(v);
}

}  // namespace mecmfg::aoi
