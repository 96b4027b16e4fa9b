#include "chordalcov/predict.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "chordalcov/model_select.hpp"

namespace chordalcov {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

Dataset ingest_csv_text(const std::string& text, bool sqrt_transform,
                        bool has_header) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (has_header && labels.empty() && rows.empty()) {
      labels = fields;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (size_t c = 0; c < fields.size(); ++c) {
      if (fields[c].empty())
        throw MissingValue("empty cell at line " + std::to_string(lineno) +
                           ", column " + std::to_string(c + 1));
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[c], &used);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + fields[c] + "' at line " +
                         std::to_string(lineno));
      }
      if (used != fields[c].size())
        throw ParseError("bad number '" + fields[c] + "' at line " +
                         std::to_string(lineno));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyData("no rows in CSV");

  Dataset d;
  d.values = Mat(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows.front().size(); ++j)
      d.values(i, j) = rows[i][j];
  if (sqrt_transform) {
    d.values = (d.values.array() + 0.25).sqrt().matrix();
    d.transform = "sqrt-quarter";
  }
  if (has_header) d.labels = std::move(labels);
  return d;
}

Dataset ingest_csv_file(const std::string& path, bool sqrt_transform,
                        bool has_header) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return ingest_csv_text(buf.str(), sqrt_transform, has_header);
}

HalfSplitResult half_split_predict(const Mat& rows, int split,
                                   const Mat& sigma, const Vec& mu) {
  const int r = static_cast<int>(sigma.rows());
  if (split <= 0 || split >= r)
    throw DomainError("split must partition the columns");
  if (rows.cols() != r || mu.size() != r)
    throw DomainError("prediction dimension mismatch");
  const int m = r - split;
  const Mat s11 = sigma.topLeftCorner(split, split);
  const Mat s21 = sigma.bottomLeftCorner(m, split);
  Eigen::LLT<Mat> llt(s11);
  if (llt.info() != Eigen::Success)
    throw SingularBlock("Sigma_11 is not invertible");
  const Mat coef = llt.solve(s21.transpose()).transpose();  // m x split

  HalfSplitResult out;
  out.predictions = Mat(rows.rows(), m);
  Vec err_acc = Vec::Zero(m);
  for (int i = 0; i < rows.rows(); ++i) {
    const Vec x1 = rows.row(i).head(split).transpose();
    const Vec pred = mu.tail(m) + coef * (x1 - mu.head(split));
    out.predictions.row(i) = pred.transpose();
    err_acc += (rows.row(i).tail(m).transpose() - pred).cwiseAbs();
  }
  out.per_timepoint_abs_err = err_acc / double(rows.rows());
  out.mean_abs_err = out.per_timepoint_abs_err.mean();
  return out;
}

std::vector<std::pair<int, int>> kfold_bounds(int n, int K) {
  if (K < 1 || K > n) throw DomainError("need 1 <= K <= n");
  const int base = (n + K - 1) / K;
  std::vector<std::pair<int, int>> folds;
  for (int start = 0; start < n; start += base)
    folds.emplace_back(start, std::min(start + base, n));
  return folds;
}

PredictorSpec parse_predictor_spec(const std::string& text) {
  PredictorSpec spec;
  spec.label = text;
  std::string body = text;
  const auto pos = body.rfind(':');
  if (pos != std::string::npos) {
    std::string tail = body.substr(pos + 1);
    if (tail == "L1" || tail == "l1") {
      spec.variant = Loss::L1;
      body = body.substr(0, pos);
    } else if (tail == "L2" || tail == "l2") {
      spec.variant = Loss::L2;
      body = body.substr(0, pos);
    }
  }
  spec.base = parse_estimator_spec(body);
  return spec;
}

FittedPredictor fit_predictor(const Mat& train, TreePtr tree,
                              const PredictorSpec& spec,
                              const Mat* oracle_sigma) {
  const int n = static_cast<int>(train.rows());
  const CenteredCov cc = sample_cov_centered(train);
  FittedPredictor out;
  out.mu = cc.mu;
  switch (spec.base.kind) {
    case EstimatorSpec::Kind::Truth:
      if (!oracle_sigma)
        throw DomainError("'truth' predictor needs an oracle covariance");
      out.sigma = *oracle_sigma;
      break;
    case EstimatorSpec::Kind::Mle:
      out.sigma = cc.S;
      break;
    case EstimatorSpec::Kind::MleG:
      out.sigma = complete(mle_g(cc.S, tree).sigma);
      break;
    case EstimatorSpec::Kind::Reference: {
      EstimateBundle b = reference_bundle(n, cc.S, tree);
      out.sigma = complete(spec.variant == Loss::L1 ? b.sigma_l1 : b.sigma_l2);
      break;
    }
    case EstimatorSpec::Kind::Bayes: {
      EstimateBundle b = bayes_bundle(spec.base.prior.instantiate(tree), n, cc.S);
      out.sigma = complete(spec.variant == Loss::L1 ? b.sigma_l1 : b.sigma_l2);
      break;
    }
    case EstimatorSpec::Kind::EbProportional:
    case EstimatorSpec::Kind::EbAffine: {
      const EbSpec eb = spec.base.kind == EstimatorSpec::Kind::EbProportional
                            ? EbSpec::Proportional
                            : EbSpec::Affine;
      const EbResult fit = empirical_bayes(train, tree, eb, spec.base.eb_scale);
      GMatrix theta = spec.base.eb_scale == PriorSpec::Scale::Calibrated
                          ? calibrate_theta(fit.shape, tree)
                          : identity_gmatrix(tree);
      EstimateBundle b = bayes_bundle(
          WpgParams::make(fit.shape, tree, std::move(theta)), n, cc.S);
      out.sigma = complete(spec.variant == Loss::L1 ? b.sigma_l1 : b.sigma_l2);
      break;
    }
  }
  return out;
}

std::vector<double> kfold_cv(const Dataset& data,
                             const std::vector<TreePtr>& candidates, int K,
                             const PredictorSpec& spec, int split) {
  const int n = static_cast<int>(data.values.rows());
  const int r = static_cast<int>(data.values.cols());
  if (split < 0) split = r / 2;
  const auto folds = kfold_bounds(n, K);

  std::vector<double> errors(candidates.size(), 0.0);
  for (size_t c = 0; c < candidates.size(); ++c) {
    double acc = 0.0;
    for (const auto& [begin, end] : folds) {
      const int test_n = end - begin;
      Mat train(n - test_n, r);
      train.topRows(begin) = data.values.topRows(begin);
      train.bottomRows(n - end) = data.values.bottomRows(n - end);
      const Mat test = data.values.middleRows(begin, test_n);
      const FittedPredictor fit =
          fit_predictor(train, candidates[c], spec, nullptr);
      acc += half_split_predict(test, split, fit.sigma, fit.mu).mean_abs_err;
    }
    errors[c] = acc / folds.size();
  }
  return errors;
}

ForecastReport forecast_report(const Dataset& data, int train_size,
                               const std::vector<std::string>& estimators,
                               TreePtr tree, int split,
                               const Mat* oracle_sigma) {
  const int n = static_cast<int>(data.values.rows());
  const int r = static_cast<int>(data.values.cols());
  if (train_size <= 0 || train_size >= n)
    throw DomainError("train size must leave a nonempty test set");
  if (split < 0) split = r / 2;

  const Mat train = data.values.topRows(train_size);
  const Mat test = data.values.bottomRows(n - train_size);

  ForecastReport rep;
  rep.train_size = train_size;
  rep.split = split;
  for (int j = split; j < r; ++j) rep.time_points.push_back(j + 1);

  int mle_row = -1;
  for (const auto& text : estimators) {
    const PredictorSpec spec = parse_predictor_spec(text);
    if (spec.base.kind == EstimatorSpec::Kind::Mle && mle_row < 0)
      mle_row = static_cast<int>(rep.estimators.size());
    const FittedPredictor fit = fit_predictor(train, tree, spec, oracle_sigma);
    const HalfSplitResult res =
        half_split_predict(test, split, fit.sigma, fit.mu);
    rep.estimators.push_back(text);
    rep.per_time_errors.push_back(res.per_timepoint_abs_err);
    rep.mean_errors.push_back(res.mean_abs_err);
  }
  rep.pct_reduction_vs_mle.assign(rep.estimators.size(),
                                  std::numeric_limits<double>::quiet_NaN());
  if (mle_row >= 0) {
    const double base = rep.mean_errors[mle_row];
    for (size_t e = 0; e < rep.estimators.size(); ++e)
      rep.pct_reduction_vs_mle[e] = 100.0 * (base - rep.mean_errors[e]) / base;
  }
  return rep;
}

}  // namespace chordalcov
