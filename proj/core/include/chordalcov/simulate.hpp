#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "chordalcov/estimators.hpp"
#include "chordalcov/rng.hpp"

namespace chordalcov {

// Synthetic truth: project a template covariance onto the pattern, then
// complete. The completed matrix is Markov with respect to the tree.
struct TrueSigma {
  GMatrix sigma;
  Mat completed;
};
TrueSigma make_true_sigma(const Mat& tmpl, TreePtr tree);

// AR(1)-style template rho^{|i-j|}, unit diagonal; positive definite.
Mat ar1_template(int r, double rho);

// Covariance whose precision is exactly banded with width phi.size():
// Omega = L^t L with L unit lower triangular, L(i, i-d) = -phi[d-1].
// The AR(k)-process construction, positive definite for any phi.
Mat banded_precision_covariance(int r, const std::vector<double>& phi);

// n i.i.d. rows from N(0, sigma_hat), deterministic given the seed.
Mat sample_data(const Mat& sigma_hat, int n, std::uint64_t seed);

// Wishart with density proportional to |y|^{p-(d+1)/2} exp(-<theta, y>)
// (so E(Y) = p * theta^{-1}), and its inverse counterpart.
Mat wishart_sample(Rng& rng, double p, const Mat& theta);
Mat inverse_wishart_sample(Rng& rng, double p, const Mat& theta);

// Layered sampler for the inverse family at the one-parameter shape:
// clique C_1 from an inverse Wishart, then per layer the Schur block from
// an inverse Wishart and the normalized cross block from a matrix normal
// with conditional covariance (1/2) theta_<j>^{-1} (x) x_[j]. .
std::vector<GMatrix> hiw_sample(double delta, const GMatrix& theta, int count,
                                std::uint64_t seed);
GMatrix hiw_sample_one(double delta, const GMatrix& theta, Rng& rng);

// Numeric mean of the inverse family by tensor-grid quadrature over the
// clique-block parametrization with Schur-positive domain; supports r <= 3
// (single cliques up to size 3 and two-clique trees of 2x2 cliques sharing
// one vertex, componentwise). Self-normalizing, so independent of the
// closed-form normalizing constant. Throws DimensionTooLarge otherwise and
// MomentUndefined when the integral fails to converge under refinement.
GMatrix quadrature_mean(const WpgParams& p);

// Numeric check of the normalizing constant: log of the integral of the
// unnormalized density over Q_G. Same support envelope as quadrature_mean.
double quadrature_log_normalizer(const WpgParams& p);

// Monte Carlo risk harness.
struct SimConfig {
  TreePtr tree;
  Mat truth_template;                  // projected+completed internally
  std::vector<std::string> estimators; // spec strings, see parse_estimator
  std::vector<int> sample_sizes;
  int replications = 1000;
  std::uint64_t seed = 0;
  bool record_eigenvalues = false;
  // Losses to record; empty means all of L1_sigma, L2_sigma, L1_omega,
  // L2_omega.
  std::vector<std::string> losses;
};

struct RiskCell {
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
  bool missing = true;
};

struct RiskTable {
  std::vector<std::string> estimators;
  std::vector<int> sample_sizes;
  std::vector<std::string> losses;  // L1_sigma, L2_sigma, L1_omega, L2_omega
  // cells[est][n_index][loss_index]
  std::vector<std::vector<std::vector<RiskCell>>> cells;
  // mean spectra per estimator at the largest n, for scree output:
  // sigma_eigenvalues[est], omega_eigenvalues[est] descending; entry 0
  // is the truth labelled "truth".
  std::vector<std::string> eigen_labels;
  std::vector<Vec> sigma_eigenvalues;
  std::vector<Vec> omega_eigenvalues;
};

RiskTable run_risk(const SimConfig& cfg);

// Number of worker threads: CHORDALCOV_THREADS or hardware concurrency.
int default_thread_count();

// Deterministic parallel map: results land in index order.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace chordalcov
