#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chordalcov/estimators.hpp"
#include "chordalcov/specs.hpp"

namespace chordalcov {

// Ingested observation matrix, one row per observation. transform is
// "raw" or "sqrt-quarter" (x = sqrt(N + 1/4)).
struct Dataset {
  Mat values;
  std::vector<std::string> labels;
  std::string transform = "raw";
};

Dataset ingest_csv_text(const std::string& text, bool sqrt_transform,
                        bool has_header);
Dataset ingest_csv_file(const std::string& path, bool sqrt_transform,
                        bool has_header);

// Best linear prediction of columns past `split` from the first `split`
// columns: x2 = mu2 + Sigma21 Sigma11^{-1} (x1 - mu1).
struct HalfSplitResult {
  Mat predictions;            // rows x (r - split)
  Vec per_timepoint_abs_err;  // mean |error| per predicted column
  double mean_abs_err = 0.0;
};
HalfSplitResult half_split_predict(const Mat& rows, int split,
                                   const Mat& sigma, const Vec& mu);

// Contiguous fold boundaries [begin, end): blocks of ceil(n/K) rows until
// the remainder. 399 rows with K = 10 gives nine 40s and one 39.
std::vector<std::pair<int, int>> kfold_bounds(int n, int K);

// A Sigma-producing estimator for the prediction pipeline: an estimator
// spec plus, for Bayes estimators, which loss's estimator to complete.
// Spec strings take an optional ":L1"/":L2" suffix (default L1).
struct PredictorSpec {
  EstimatorSpec base;
  Loss variant = Loss::L1;
  std::string label;
};
PredictorSpec parse_predictor_spec(const std::string& text);

// Fits the dense completed Sigma estimate and training mean on `train`
// (centered by the training column means).
struct FittedPredictor {
  Mat sigma;
  Vec mu;
};
FittedPredictor fit_predictor(const Mat& train, TreePtr tree,
                              const PredictorSpec& spec,
                              const Mat* oracle_sigma = nullptr);

// K-fold cross-validation error of the half-split predictor, one value
// per candidate graph (mean over folds of the mean absolute error).
std::vector<double> kfold_cv(const Dataset& data,
                             const std::vector<TreePtr>& candidates, int K,
                             const PredictorSpec& spec, int split = -1);

struct ForecastReport {
  std::vector<std::string> estimators;
  std::vector<int> time_points;      // 1-based predicted column indices
  std::vector<Vec> per_time_errors;  // one series per estimator
  std::vector<double> mean_errors;
  // Percentage reduction vs the sample-covariance row, recomputed from the
  // stored series; NaN when no "mle" row is present.
  std::vector<double> pct_reduction_vs_mle;
  int train_size = 0;
  int split = 0;
};

ForecastReport forecast_report(const Dataset& data, int train_size,
                               const std::vector<std::string>& estimators,
                               TreePtr tree, int split = -1,
                               const Mat* oracle_sigma = nullptr);

}  // namespace chordalcov
