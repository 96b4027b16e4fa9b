#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chordalcov/chordal_matrix.hpp"
#include "chordalcov/graph.hpp"

namespace chordalcov {

// Shape hyperparameters of the family: one alpha per clique and one beta
// per separator occurrence (clique j >= 1 owns beta[j-1]). Occurrences of
// the same separator set must carry equal betas.
struct ShapeParams {
  Vec alpha;  // size k
  Vec beta;   // size k-1

  ShapeParams shifted(double d) const;  // alpha - d, beta - d
};

// Full parameterisation: shape plus scale theta in Q_G. The reference
// prior is improper and carries no theta. `on_two_sigma` records the
// convention that the distribution is placed on 2*Sigma (equivalently on
// Omega/2); public estimators convert at the boundary.
struct WpgParams {
  TreePtr tree;
  ShapeParams shape;
  std::optional<GMatrix> theta;
  bool on_two_sigma = true;

  bool proper() const { return theta.has_value(); }
  const GMatrix& theta_ref() const;

  static WpgParams hiw(double delta, TreePtr tree, GMatrix theta);
  static WpgParams reference(TreePtr tree);
  static WpgParams make(ShapeParams shape, TreePtr tree, GMatrix theta);
};

// One-parameter shape: alpha_i = -(delta + c_i - 1)/2, beta_i = -(delta + s_i - 1)/2.
ShapeParams hiw_shape(double delta, const JunctionTree& t);

// Proportional rule delta_i = c_i * factor, i.e.
// alpha_i = -(factor*c_i + c_i - 1)/2, beta_i = -(factor*s_i + s_i - 1)/2.
ShapeParams proportional_shape(double factor, const JunctionTree& t);

// Affine rule alpha_i = a*c_i + b, beta_i = a*s_i + b.
ShapeParams affine_shape(double a, double b, const JunctionTree& t);

// Shape of the objective (improper) prior: alpha = 0,
// beta_2 = (c_1+c_2)/2 - s_2, beta_j = (c_j - s_j)/2 for j >= 3.
ShapeParams reference_shape(const JunctionTree& t);

// gamma_2 = sum over occurrences j with S_j = S_2 of
// (alpha_j - beta_2 + (c_j - s_2)/2); zero for a single clique.
double gamma2(const ShapeParams& s, const JunctionTree& t);

struct BpReport {
  bool ok = false;
  std::string violation;          // empty when ok
  double equality_residual = 0.0; // worst |condition-1| residual
  std::vector<double> inequality_margins;  // condition 2 then 3, all must be > 0
};

// Membership in the admissible set B_P for the tree's perfect order.
// Condition 3 is vacuous when s_2 = 0 (the Gamma_0 factor is 1).
BpReport in_bp(const ShapeParams& s, const JunctionTree& t);

// log Gamma_d(p); Gamma_0 = 1. Throws DomainError when p <= (d-1)/2.
double log_multigamma(int d, double p);

// log of the normalizing factor Gamma_II(alpha, beta); requires in_bp.
double log_gamma_ii(const ShapeParams& s, const JunctionTree& t);

// log H_G(alpha, beta; x) = sum alpha_j log det x_{C_j}
//                          - sum beta_j log det x_{S_j}  (per occurrence).
double log_h_g(const ShapeParams& s, const GMatrix& x);

// Conjugate update given n observations with sample covariance S:
// shape shifts by n/2, theta gains kappa(nS). Works for the improper
// reference prior as well (theta starts at zero).
WpgParams posterior_update(const WpgParams& p, int n, const Mat& S);

// Diagonal theta making the prior mean of the matrix equal to 2*I
// (so E(Sigma) = I under the on-2-Sigma convention), per-layer closed
// forms with the trace term fed by already-computed layer expectations.
GMatrix calibrate_theta(const ShapeParams& s, TreePtr tree);

}  // namespace chordalcov
