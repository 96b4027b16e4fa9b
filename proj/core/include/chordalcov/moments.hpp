#pragma once

#include <string>
#include <vector>

#include "chordalcov/priors.hpp"

namespace chordalcov {

// Existence margins for the first moment of the inverse family. All three
// margin families must be strictly negative for the mean to exist:
//   alpha_1 + (c_1+1)/2 + gamma_2,
//   alpha_1 + (c_1-s_2+1)/2,
//   alpha_j + (c_j-s_j+1)/2  for j >= 2.
struct MomentReport {
  std::vector<double> margins;
  std::vector<std::string> labels;
  bool exists = false;
};

MomentReport mean_exists(const ShapeParams& s, const JunctionTree& t);

// Mean of Omega under the prior (n = 0) or the posterior given n, S:
// E(Omega) = -2 [ sum_j a_j (psi_{C_j}^{-1})^0 - sum_j b_j (psi_{S_j}^{-1})^0 ]
// with a = alpha - n/2, b = beta - n/2, psi = theta + kappa(nS).
SparsePrecision wpg_mean(const WpgParams& p);
SparsePrecision wpg_mean(const WpgParams& p, int n, const Mat& S);

// Mean of the inverse family, assembled layer by layer in the perfect
// order. Throws MomentUndefined when a margin is >= -1e-6 (the closed
// forms blow up at the boundary).
GMatrix iwpg_mean(const WpgParams& p);

// Posterior mean of Sigma: the layered mean at the updated parameters,
// halved (the prior sits on 2*Sigma).
GMatrix posterior_mean_sigma(const WpgParams& prior, int n, const Mat& S);

// Closed-form posterior mean of Omega under the reference prior:
// sum_j (S_{C_j}^{-1})^0 - (1-(c_1+c_2-2 s_2)/n)(S_{S_2}^{-1})^0
//                        - sum_{j>=3} (1-(c_j-s_j)/n)(S_{S_j}^{-1})^0.
SparsePrecision reference_mean_omega(int n, const Mat& S, TreePtr tree);

}  // namespace chordalcov
