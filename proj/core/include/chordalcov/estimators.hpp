#pragma once

#include <string>

#include "chordalcov/moments.hpp"

namespace chordalcov {

// S = (1/n) sum z_i z_i^t, rows of `data` are observations. Models are
// zero-mean, so there is no centering here; callers working with real
// data center explicitly.
Mat sample_cov(const Mat& data);

// Centered variant for observed (non-zero-mean) data: returns the
// covariance about the column means along with the means themselves.
struct CenteredCov {
  Mat S;
  Vec mu;
};
CenteredCov sample_cov_centered(const Mat& data);

// Maximum likelihood within the graphical model:
// Omega_g = sum_C (S_C^{-1})^0 - sum_S nu(S)(S_S^{-1})^0, Sigma_g = phi(Omega_g).
struct GraphicalMle {
  SparsePrecision omega;
  GMatrix sigma;
};
GraphicalMle mle_g(const Mat& S, TreePtr tree);

// The four Bayes estimators under the graph-adapted losses. Dualities
// sigma_l1 = kappa(omega_l2^{-1}) and sigma_l2 = kappa(omega_l1^{-1})
// hold by construction.
struct EstimateBundle {
  GMatrix sigma_l1;
  GMatrix sigma_l2;
  SparsePrecision omega_l1;
  SparsePrecision omega_l2;
  std::string prior_spec;
  int n = 0;
};

EstimateBundle bayes_bundle(const WpgParams& prior, int n, const Mat& S);
EstimateBundle reference_bundle(int n, const Mat& S, TreePtr tree);

enum class Loss { L1, L2 };

// Graph-adapted losses for Sigma estimates living in Q_G:
//   L1 = <est, truth_hat^{-1}> - log(det est_hat / det truth_hat) - r,
//   L2 = sum over diagonal and both edge orientations of squared deviation.
double loss_sigma(const GMatrix& est, const GMatrix& truth, Loss kind);

// Losses for Omega estimates. The estimate may be any positive definite
// matrix (the saturated mle S^{-1} has no structural zeros); the L2 sum
// runs over the pattern of the truth's tree.
double loss_omega(const Mat& est, const SparsePrecision& truth, Loss kind);
double loss_omega(const SparsePrecision& est, const SparsePrecision& truth,
                  Loss kind);

// Saturated-model posterior mean (nu D + n S) / (nu + n - r - 1).
Mat saturated_posterior_mean(double nu, const Mat& D, int n, const Mat& S);

}  // namespace chordalcov
