#pragma once

#include <array>
#include <string>
#include <vector>

#include "chordalcov/specs.hpp"

namespace chordalcov {

// Exact log marginal likelihood of the data under a proper prior, via the
// normalizing-constant ratio. Deterministic, no sampling. The Gaussian
// constant is -(n r / 2) log(pi); on-2-Sigma bookkeeping absorbs the 2,
// which is pinned by the r = 1 quadrature oracle and frozen in tests.
double log_marginal(const Mat& data, const WpgParams& prior);

enum class Criterion { Marginal, Cv };

struct ScoredModel {
  std::string id;
  double score = 0.0;      // log marginal (higher wins) or CV error (lower wins)
  double posterior = 0.0;  // normalized over candidates, marginal criterion only
  long edge_count = 0;
};

struct SelectionResult {
  std::vector<ScoredModel> ranked;  // best first; ties go to fewer edges
  std::string criterion;
  std::string best_id;
};

// Scores the banded family k = 0..kmax under a uniform graph prior.
// For the CV criterion the score is the K-fold half-split forecast error
// of the prior's L1 Sigma estimator ("reference" allowed there).
SelectionResult select_banded(const Mat& data, int kmax, const PriorSpec& prior,
                              Criterion criterion, int folds = 10,
                              int split = -1);

// Same over an explicit grid of (k1, k2, changepoint) triples (0-based
// changepoint vertex).
SelectionResult select_diff_banded(const Mat& data,
                                   const std::vector<std::array<int, 3>>& grid,
                                   const PriorSpec& prior, Criterion criterion,
                                   int folds = 10, int split = -1);

enum class EbSpec { Proportional, Affine };

struct EbResult {
  ShapeParams shape;
  double objective = 0.0;  // maximized log marginal
  double delta = 0.0;      // Proportional
  double a = 0.0, b = 0.0; // Affine
};

// Maximizes the marginal likelihood over the admissible shape region
// (golden-section in 1-D, Nelder-Mead in 2-D, restricted to B_P).
EbResult empirical_bayes(const Mat& data, TreePtr tree, EbSpec spec,
                         PriorSpec::Scale scale = PriorSpec::Scale::Identity);

}  // namespace chordalcov
