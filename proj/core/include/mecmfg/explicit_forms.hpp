#pragma once

// Long-hand transcriptions of the red and yellow/green balance systems,
// written out equation by equation rather than assembled from the transition
// tables. The two encodings of the same chain are compared coefficient by
// coefficient; any mismatch is reported as a structured diff instead of
// silently trusting either side.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mecmfg::aoi {

struct AssemblyDiffEntry {
  std::string system;  // which matrix differs
  int row = 0;
  int col = 0;
  double assembled = 0.0;
  double long_hand = 0.0;
};

struct AssemblyDiff {
  std::vector<AssemblyDiffEntry> entries;
  bool empty() const { return entries.empty(); }
  std::string to_string() const;
};

Eigen::MatrixXd red_explicit_stationary_matrix(double lambda_r, double p_r,
                                               double lambda_minus_r, double mu0,
                                               double mu);
Eigen::MatrixXd red_explicit_moment_matrix(double lambda_r, double p_r,
                                           double lambda_minus_r, double mu0, double mu);
Eigen::MatrixXd yg_explicit_stationary_matrix(double lambda_b, double p_b,
                                              double lambda_e, double lambda_high_total,
                                              double lambda_high_local, double mu0,
                                              double mu);
Eigen::MatrixXd yg_explicit_moment_matrix(double lambda_b, double p_b, double lambda_e,
                                          double lambda_high_total,
                                          double lambda_high_local, double mu0,
                                          double mu);

/// Compares the table-assembled systems against the long-hand ones at one
/// parameter point. Coefficients are multilinear in the rates, so agreement
/// at a handful of generic points certifies algebraic identity.
AssemblyDiff diff_red_explicit(double lambda_r, double p_r, double lambda_minus_r,
                               double mu0, double mu);
AssemblyDiff diff_yg_explicit(double lambda_b, double p_b, double lambda_e,
                              double lambda_high_total, double lambda_high_local,
                              double mu0, double mu);

}  // namespace mecmfg::aoi
