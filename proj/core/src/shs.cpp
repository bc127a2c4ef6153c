#include "mecmfg/shs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mecmfg::shs {

namespace {

std::vector<double> total_outflow(const CtmcSpec& spec) {
  std::vector<double> out(static_cast<std::size_t>(spec.num_states), 0.0);
  for (const auto& t : spec.transitions) {
    out[static_cast<std::size_t>(t.source_state)] += t.rate;
  }
  return out;
}

// Tarjan strongly connected components over the positive-rate edges.
std::vector<int> scc_labels(const CtmcSpec& spec) {
  const int n = spec.num_states;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& t : spec.transitions) {
    if (t.source_state != t.target_state) {
      adj[static_cast<std::size_t>(t.source_state)].push_back(t.target_state);
    }
  }
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
      comp(static_cast<std::size_t>(n), -1);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;

  // iterative DFS: frame = (node, next child position)
  std::vector<std::pair<int, std::size_t>> frames;
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    frames.emplace_back(root, 0);
    while (!frames.empty()) {
      auto& [u, child] = frames.back();
      const auto su = static_cast<std::size_t>(u);
      if (child == 0) {
        index[su] = low[su] = next_index++;
        stack.push_back(u);
        on_stack[su] = true;
      }
      bool descended = false;
      while (child < adj[su].size()) {
        const int w = adj[su][child++];
        const auto sw = static_cast<std::size_t>(w);
        if (index[sw] == -1) {
          frames.emplace_back(w, 0);
          descended = true;
          break;
        }
        if (on_stack[sw]) low[su] = std::min(low[su], index[sw]);
      }
      if (descended) continue;
      if (low[su] == index[su]) {
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = false;
          comp[static_cast<std::size_t>(w)] = next_comp;
          if (w == u) break;
        }
        ++next_comp;
      }
      const int done = u;
      frames.pop_back();
      if (!frames.empty()) {
        const auto sp = static_cast<std::size_t>(frames.back().first);
        low[sp] = std::min(low[sp], low[static_cast<std::size_t>(done)]);
      }
    }
  }
  return comp;
}

}  // namespace

std::vector<std::string> validate_spec(const CtmcSpec& spec) {
  std::vector<std::string> violations;
  if (spec.num_states < 1) {
    violations.push_back("num_states must be >= 1");
    return violations;
  }
  if (spec.age_dim < 1) violations.push_back("age_dim must be >= 1");
  if (static_cast<int>(spec.growth.size()) != spec.num_states) {
    violations.push_back("growth must have one row per state");
  } else {
    for (int s = 0; s < spec.num_states; ++s) {
      const auto& row = spec.growth[static_cast<std::size_t>(s)];
      if (static_cast<int>(row.size()) != spec.age_dim) {
        violations.push_back("growth row for state " + std::to_string(s) +
                             " has wrong length");
        continue;
      }
      for (int u : row) {
        if (u != 0 && u != 1) {
          violations.push_back("growth entry for state " + std::to_string(s) +
                               " not in {0,1}");
          break;
        }
      }
    }
  }
  for (std::size_t m = 0; m < spec.transitions.size(); ++m) {
    const auto& t = spec.transitions[m];
    const std::string tag = "transition " + std::to_string(m);
    if (t.source_state < 0 || t.source_state >= spec.num_states) {
      violations.push_back(tag + ": source state out of range");
    }
    if (t.target_state < 0 || t.target_state >= spec.num_states) {
      violations.push_back(tag + ": target state out of range");
    }
    if (!(t.rate > 0.0) || !std::isfinite(t.rate)) {
      violations.push_back(tag + ": rate must be positive and finite");
    }
    if (static_cast<int>(t.reset.size()) != spec.age_dim) {
      violations.push_back(tag + ": reset map must have exactly age_dim coordinates");
    } else {
      for (const auto& op : t.reset) {
        if (!op.is_zero() && (op.source < 0 || op.source >= spec.age_dim)) {
          violations.push_back(tag + ": reset source coordinate out of range");
          break;
        }
      }
    }
  }
  if (!violations.empty()) return violations;

  const auto comp = scc_labels(spec);
  const int num_comps = 1 + *std::max_element(comp.begin(), comp.end());
  if (num_comps > 1) {
    // name the offending states relative to state 0
    std::vector<std::vector<int>> fwd(static_cast<std::size_t>(spec.num_states)),
        rev(static_cast<std::size_t>(spec.num_states));
    for (const auto& t : spec.transitions) {
      fwd[static_cast<std::size_t>(t.source_state)].push_back(t.target_state);
      rev[static_cast<std::size_t>(t.target_state)].push_back(t.source_state);
    }
    auto reach = [&](const std::vector<std::vector<int>>& adj) {
      std::vector<bool> seen(static_cast<std::size_t>(spec.num_states), false);
      std::vector<int> stack{0};
      seen[0] = true;
      while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int w : adj[static_cast<std::size_t>(u)]) {
          if (!seen[static_cast<std::size_t>(w)]) {
            seen[static_cast<std::size_t>(w)] = true;
            stack.push_back(w);
          }
        }
      }
      return seen;
    };
    const auto from0 = reach(fwd);
    const auto to0 = reach(rev);
    for (int s = 0; s < spec.num_states; ++s) {
      if (!from0[static_cast<std::size_t>(s)]) {
        violations.push_back("state " + std::to_string(s) + " is unreachable from state 0");
      } else if (!to0[static_cast<std::size_t>(s)]) {
        violations.push_back("state " + std::to_string(s) + " cannot reach state 0");
      }
    }
    if (violations.empty()) {
      violations.push_back("chain is not irreducible (" + std::to_string(num_comps) +
                           " communicating classes)");
    }
  }
  return violations;
}

Eigen::MatrixXd generator_matrix(const CtmcSpec& spec) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(spec.num_states, spec.num_states);
  for (const auto& t : spec.transitions) {
    if (t.source_state == t.target_state) continue;
    q(t.source_state, t.target_state) += t.rate;
    q(t.source_state, t.source_state) -= t.rate;
  }
  return q;
}

Eigen::MatrixXd stationary_balance_matrix(const CtmcSpec& spec) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(spec.num_states, spec.num_states);
  const auto out = total_outflow(spec);
  for (int s = 0; s < spec.num_states; ++s) {
    b(s, s) += out[static_cast<std::size_t>(s)];
  }
  for (const auto& t : spec.transitions) {
    b(t.target_state, t.source_state) -= t.rate;
  }
  return b;
}

Eigen::MatrixXd moment_balance_matrix(const CtmcSpec& spec) {
  const int n = spec.num_states * spec.age_dim;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const auto out = total_outflow(spec);
  for (int s = 0; s < spec.num_states; ++s) {
    for (int k = 0; k < spec.age_dim; ++k) {
      const int row = s * spec.age_dim + k;
      m(row, row) += out[static_cast<std::size_t>(s)];
    }
  }
  for (const auto& t : spec.transitions) {
    for (int k = 0; k < spec.age_dim; ++k) {
      const auto& op = t.reset[static_cast<std::size_t>(k)];
      if (op.is_zero()) continue;
      m(t.target_state * spec.age_dim + k, t.source_state * spec.age_dim + op.source) -=
          t.rate;
    }
  }
  return m;
}

StationaryDistribution solve_stationary(const CtmcSpec& spec, const SolverOptions& options) {
  if (spec.num_states < 1) throw InvalidSpecError("empty chain");
  Eigen::MatrixXd a = stationary_balance_matrix(spec);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(spec.num_states);
  // normalization replaces the balance row of the highest-index state
  a.row(spec.num_states - 1).setOnes();
  b(spec.num_states - 1) = 1.0;

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= 1e-12 * scale) {
    throw SingularChainError(
        "stationary balance system is rank-deficient (reducible chain?)");
  }
  Eigen::VectorXd pi = lu.solve(b);
  const double residual = (a * pi - b).cwiseAbs().maxCoeff();
  if (!pi.allFinite() || residual > options.stationary_residual_tol * scale * 1e3) {
    throw SingularChainError(
        "stationary balance system is singular (reducible chain?); residual = " +
        std::to_string(residual));
  }
  for (int s = 0; s < pi.size(); ++s) {
    if (pi(s) < -1e-12) {
      throw SingularChainError("stationary solution has negative mass at state " +
                               std::to_string(s));
    }
    pi(s) = std::max(pi(s), 0.0);
  }
  return StationaryDistribution{std::move(pi)};
}

ConditionalMoments solve_conditional_moments(const CtmcSpec& spec,
                                             const StationaryDistribution& pi,
                                             const SolverOptions& options) {
  const int d = spec.age_dim;
  const int n = spec.num_states * d;
  const Eigen::MatrixXd m = moment_balance_matrix(spec);
  Eigen::VectorXd rhs(n);
  for (int s = 0; s < spec.num_states; ++s) {
    for (int k = 0; k < d; ++k) {
      rhs(s * d + k) =
          static_cast<double>(spec.growth[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]) *
          pi.probabilities(s);
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
  const double mat_scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (min_pivot <= 1e-12 * mat_scale) {
    throw SingularMomentSystemError(
        "moment balance system is rank-deficient (no stationary age moments?)");
  }
  const Eigen::VectorXd x = lu.solve(rhs);
  const double scale = std::max({1.0, m.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff()});
  const double residual = (m * x - rhs).cwiseAbs().maxCoeff();
  if (!x.allFinite() || residual > options.moment_residual_tol * scale) {
    throw SingularMomentSystemError(
        "moment balance system is not uniquely solvable; residual = " +
        std::to_string(residual));
  }
  ConditionalMoments result;
  result.moments = Eigen::MatrixXd(spec.num_states, d);
  for (int s = 0; s < spec.num_states; ++s) {
    for (int k = 0; k < d; ++k) {
      result.moments(s, k) = x(s * d + k);
    }
  }
  return result;
}

double average_aoi(const ConditionalMoments& moments) {
  return moments.moments.col(0).sum();
}

double stationary_residual(const CtmcSpec& spec, const StationaryDistribution& pi) {
  const Eigen::MatrixXd q = generator_matrix(spec);
  return (pi.probabilities.transpose() * q).cwiseAbs().maxCoeff();
}

double moment_residual(const CtmcSpec& spec, const StationaryDistribution& pi,
                       const ConditionalMoments& v) {
  const int d = spec.age_dim;
  const auto out = total_outflow(spec);
  double worst = 0.0;
  for (int s = 0; s < spec.num_states; ++s) {
    for (int k = 0; k < d; ++k) {
      const double lhs = v.moments(s, k) * out[static_cast<std::size_t>(s)];
      double rhs =
          static_cast<double>(spec.growth[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]) *
          pi.probabilities(s);
      double magnitude = std::abs(rhs);
      for (const auto& t : spec.transitions) {
        if (t.target_state != s) continue;
        const auto& op = t.reset[static_cast<std::size_t>(k)];
        if (op.is_zero()) continue;
        const double term = t.rate * v.moments(t.source_state, op.source);
        rhs += term;
        magnitude += std::abs(term);
      }
      const double scale = std::max({std::abs(lhs), magnitude, 1e-300});
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
  }
  return worst;
}

}  // namespace mecmfg::shs
