#include "mecmfg/explicit_forms.hpp"

#include <cmath>
#include <sstream>

#include "mecmfg/chains.hpp"

namespace mecmfg::aoi {

namespace {

// One inflow term of a long-hand equation: rate * (v-vector of the source
// state with a per-coordinate index pattern). Pattern entries: -1 resets to
// zero, otherwise the source coordinate index.
struct Term {
  double rate;
  int source;
  int pattern[3];
};

Eigen::MatrixXd stationary_from_rows(int c, double outflow,
                                     const std::vector<std::vector<std::pair<double, int>>>& rows,
                                     const std::vector<double>& self_coeff) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(c, c);
  for (int s = 0; s < c; ++s) {
    b(s, s) = outflow - self_coeff[static_cast<std::size_t>(s)];
    for (const auto& [rate, src] : rows[static_cast<std::size_t>(s)]) {
      b(s, src) -= rate;
    }
  }
  return b;
}

Eigen::MatrixXd moment_from_terms(int c, double outflow,
                                  const std::vector<std::vector<Term>>& rows) {
  const int d = 3;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(c * d, c * d);
  for (int s = 0; s < c; ++s) {
    for (int k = 0; k < d; ++k) {
      m(s * d + k, s * d + k) = outflow;
    }
    for (const auto& term : rows[static_cast<std::size_t>(s)]) {
      for (int k = 0; k < d; ++k) {
        const int j = term.pattern[k];
        if (j < 0) continue;
        m(s * d + k, term.source * d + j) -= term.rate;
      }
    }
  }
  return m;
}

void diff_matrices(const std::string& name, const Eigen::MatrixXd& assembled,
                   const Eigen::MatrixXd& long_hand, AssemblyDiff& out) {
  const double scale = std::max({1.0, assembled.cwiseAbs().maxCoeff(),
                                 long_hand.cwiseAbs().maxCoeff()});
  for (int r = 0; r < assembled.rows(); ++r) {
    for (int c = 0; c < assembled.cols(); ++c) {
      if (std::abs(assembled(r, c) - long_hand(r, c)) > 1e-9 * scale) {
        out.entries.push_back(AssemblyDiffEntry{name, r, c, assembled(r, c), long_hand(r, c)});
      }
    }
  }
}

}  // namespace

std::string AssemblyDiff::to_string() const {
  if (entries.empty()) return "systems agree";
  std::ostringstream os;
  for (const auto& ent : entries) {
    os << ent.system << " (" << ent.row << "," << ent.col << "): assembled "
       << ent.assembled << " vs long-hand " << ent.long_hand << "\n";
  }
  return os.str();
}

Eigen::MatrixXd red_explicit_stationary_matrix(double lambda_r, double p_r,
                                               double lambda_minus_r, double mu0,
                                               double mu) {
  const double a = lambda_r * p_r;
  const double b = lambda_r * (1 - p_r);
  const double e = lambda_minus_r;
  const double rho = lambda_r + e + mu0 + mu;
  const std::vector<double> self = {a + mu0 + mu, b + mu0 + mu, a + e + mu0 + mu};
  const std::vector<std::vector<std::pair<double, int>>> in = {
      {{a, 1}},
      {{b, 0}, {b, 2}},
      {{e, 0}, {e, 1}},
  };
  return stationary_from_rows(3, rho, in, self);
}

Eigen::MatrixXd red_explicit_moment_matrix(double lambda_r, double p_r,
                                           double lambda_minus_r, double mu0, double mu) {
  const double a = lambda_r * p_r;
  const double b = lambda_r * (1 - p_r);
  const double e = lambda_minus_r;
  const double rho = lambda_r + e + mu0 + mu;
  const std::vector<std::vector<Term>> rows = {
      // v1: own-local self, local done, shared done, own-local from state 2
      {{a, 0, {0, -1, 2}}, {mu0, 0, {1, 1, 1}}, {mu, 0, {2, 1, 2}}, {a, 1, {0, -1, 2}}},
      // v2: offload self, local done, shared done, offloads from states 1 and 3
      {{b, 1, {0, 1, -1}},
       {mu0, 1, {1, 1, 2}},
       {mu, 1, {2, 2, 2}},
       {b, 0, {0, 1, -1}},
       {b, 2, {0, 1, -1}}},
      // v3: own-local self, exogenous self, shared done, exogenous from 1 and
      // 2, local done
      {{a, 2, {0, -1, 2}},
       {e, 2, {0, 1, 0}},
       {mu, 2, {2, 1, 2}},
       {e, 0, {0, 1, 0}},
       {e, 1, {0, 1, 0}},
       {mu0, 2, {1, 1, 1}}},
  };
  return moment_from_terms(3, rho, rows);
}

Eigen::MatrixXd yg_explicit_stationary_matrix(double lambda_b, double p_b,
                                              double lambda_e, double lambda_high_total,
                                              double lambda_high_local, double mu0,
                                              double mu) {
  const double a = lambda_b * p_b;
  const double b = lambda_b * (1 - p_b);
  const double hi = lambda_high_total;
  const double hl = lambda_high_local;
  const double e = lambda_e;
  const double rho = lambda_b + e + mu0 + mu + hi + hl;
  const std::vector<double> self = {
      a + mu0 + mu,
      b + mu0 + mu,
      lambda_b + hi + e + mu0,
      a + mu0 + mu + e,
      lambda_b + hl + mu,
      lambda_b + hl + hi + e,
      a + e + hl + mu,
  };
  const std::vector<std::vector<std::pair<double, int>>> in = {
      {{a, 1}},
      {{b, 0}, {b, 3}, {mu0, 4}, {mu0, 6}},
      {{hi, 0}, {hi, 1}, {hi, 3}, {mu0, 5}},
      {{e, 0}, {e, 1}, {mu, 2}},
      {{hl, 0}, {hl, 1}, {b, 6}},
      {{hl, 2}, {hi, 4}, {hi, 6}},
      {{hl, 3}, {e, 4}, {mu, 5}},
  };
  return stationary_from_rows(7, rho, in, self);
}

Eigen::MatrixXd yg_explicit_moment_matrix(double lambda_b, double p_b, double lambda_e,
                                          double lambda_high_total,
                                          double lambda_high_local, double mu0,
                                          double mu) {
  const double a = lambda_b * p_b;
  const double b = lambda_b * (1 - p_b);
  const double hi = lambda_high_total;
  const double hl = lambda_high_local;
  const double e = lambda_e;
  const double rho = lambda_b + e + mu0 + mu + hi + hl;
  const std::vector<std::vector<Term>> rows = {
      {{a, 0, {0, -1, 2}}, {mu0, 0, {1, 1, 1}}, {mu, 0, {2, 1, 2}}, {a, 1, {0, -1, 2}}},
      {{b, 1, {0, 1, -1}},
       {mu, 1, {2, 2, 2}},
       {b, 0, {0, 1, -1}},
       {b, 3, {0, 1, -1}},
       {mu0, 1, {1, 1, 2}},
       {mu0, 4, {1, 1, 2}},
       {mu0, 6, {1, 1, 2}}},
      {{a, 2, {0, -1, 2}},
       {b, 2, {0, 1, 2}},
       {e, 2, {0, 1, 2}},
       {mu0, 2, {1, 1, 1}},
       {hi, 2, {0, 1, 0}},
       {hi, 0, {0, 1, 0}},
       {hi, 1, {0, 1, 0}},
       {hi, 3, {0, 1, 0}},
       {mu0, 5, {1, 1, 2}}},
      {{a, 3, {0, -1, 2}},
       {mu, 3, {2, 1, 2}},
       {mu0, 3, {1, 1, 1}},
       {e, 3, {0, 1, 0}},
       {e, 0, {0, 1, 0}},
       {e, 1, {0, 1, 0}},
       {mu, 2, {2, 1, 2}}},
      {{a, 4, {0, 1, 2}},
       {b, 4, {0, 1, -1}},
       {hl, 4, {0, 0, 2}},
       {mu, 4, {2, 2, 2}},
       {hl, 0, {0, 0, 2}},
       {hl, 1, {0, 0, 2}},
       {b, 6, {0, 1, -1}}},
      {{a + b, 5, {0, 1, 2}},
       {hl, 5, {0, 0, 2}},
       {hi, 5, {0, 1, 0}},
       {e, 5, {0, 1, 2}},
       {hl, 2, {0, 0, 2}},
       {hi, 4, {0, 1, 0}},
       {hi, 6, {0, 1, 0}}},
      {{a, 6, {0, 1, 2}},
       {hl, 6, {0, 0, 2}},
       {e, 6, {0, 1, 0}},
       {mu, 6, {2, 1, 2}},
       {hl, 3, {0, 0, 2}},
       {e, 4, {0, 1, 0}},
       {mu, 5, {2, 1, 2}}},
  };
  return moment_from_terms(7, rho, rows);
}

AssemblyDiff diff_red_explicit(double lambda_r, double p_r, double lambda_minus_r,
                               double mu0, double mu) {
  const auto full = red_chain_full(lambda_r, p_r, lambda_minus_r, mu0, mu);
  AssemblyDiff diff;
  diff_matrices("red stationary balance", shs::stationary_balance_matrix(full),
                red_explicit_stationary_matrix(lambda_r, p_r, lambda_minus_r, mu0, mu),
                diff);
  diff_matrices("red moment balance", shs::moment_balance_matrix(full),
                red_explicit_moment_matrix(lambda_r, p_r, lambda_minus_r, mu0, mu), diff);
  return diff;
}

AssemblyDiff diff_yg_explicit(double lambda_b, double p_b, double lambda_e,
                              double lambda_high_total, double lambda_high_local,
                              double mu0, double mu) {
  const auto full = yg_chain_full(lambda_b, p_b, lambda_e, lambda_high_total,
                                  lambda_high_local, mu0, mu);
  AssemblyDiff diff;
  diff_matrices("yg stationary balance", shs::stationary_balance_matrix(full),
                yg_explicit_stationary_matrix(lambda_b, p_b, lambda_e, lambda_high_total,
                                              lambda_high_local, mu0, mu),
                diff);
  diff_matrices("yg moment balance", shs::moment_balance_matrix(full),
                yg_explicit_moment_matrix(lambda_b, p_b, lambda_e, lambda_high_total,
                                          lambda_high_local, mu0, mu),
                diff);
  return diff;
}

}  // namespace mecmfg::aoi
