#include "chordalcov/simulate.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "chordalcov/model_select.hpp"
#include "chordalcov/specs.hpp"

namespace chordalcov {

TrueSigma make_true_sigma(const Mat& tmpl, TreePtr tree) {
  GMatrix sigma = project(tmpl, std::move(tree));
  sigma.require_in_qg("truth template");
  Mat completed = complete(sigma);
  return TrueSigma{std::move(sigma), std::move(completed)};
}

Mat ar1_template(int r, double rho) {
  if (std::abs(rho) >= 1.0) throw DomainError("need |rho| < 1");
  Mat m(r, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) m(i, j) = std::pow(rho, std::abs(i - j));
  return m;
}

Mat banded_precision_covariance(int r, const std::vector<double>& phi) {
  const int k = static_cast<int>(phi.size());
  if (k >= r) throw InvalidBand("need fewer lags than variables");
  Mat L = Mat::Identity(r, r);
  for (int i = 0; i < r; ++i)
    for (int d = 1; d <= std::min(i, k); ++d) L(i, i - d) = -phi[d - 1];
  const Mat omega = L.transpose() * L;
  Mat sigma = omega.llt().solve(Mat::Identity(r, r));
  return ((sigma + sigma.transpose()) / 2.0).eval();
}

Mat sample_data(const Mat& sigma_hat, int n, std::uint64_t seed) {
  const int r = static_cast<int>(sigma_hat.rows());
  Eigen::LLT<Mat> llt(sigma_hat);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("sampling covariance");
  const Mat L = llt.matrixL();
  Rng rng(seed);
  Mat data(n, r);
  Vec g(r);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < r; ++j) g[j] = rng.normal();
    data.row(i) = (L * g).transpose();
  }
  return data;
}

Mat wishart_sample(Rng& rng, double p, const Mat& theta) {
  const int d = static_cast<int>(theta.rows());
  if (d == 0) return Mat(0, 0);
  const double dof = 2.0 * p;
  if (!(dof > d - 1))
    throw DomainError("wishart needs 2p > d-1, got p=" + std::to_string(p));
  // Y = C A A^t C^t with V = C C^t, V = theta^{-1}/2 (Bartlett).
  const Mat V = spd_inverse<NotPositiveDefinite>(theta, "wishart scale") / 2.0;
  Eigen::LLT<Mat> llt(V);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite("wishart scale factor");
  const Mat C = llt.matrixL();
  Mat A = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    A(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int j = 0; j < i; ++j) A(i, j) = rng.normal();
  }
  Mat CA = C * A;
  Mat Y = CA * CA.transpose();
  return ((Y + Y.transpose()) / 2.0).eval();
}

Mat inverse_wishart_sample(Rng& rng, double p, const Mat& theta) {
  Mat Y = wishart_sample(rng, p, theta);
  Mat X = spd_inverse<NotPositiveDefinite>(Y, "wishart draw");
  return ((X + X.transpose()) / 2.0).eval();
}

GMatrix hiw_sample_one(double delta, const GMatrix& theta, Rng& rng) {
  if (!(delta > 0.0)) throw DomainError("need delta > 0");
  const JunctionTree& t = *theta.tree();
  const int r = t.vertex_count();
  const Mat& th = theta.dense_view();

  Mat x = Mat::Zero(r, r);
  // First clique straight from the inverse Wishart.
  {
    const auto& c0 = t.clique(0);
    const double p0 = (delta + c0.size() - 1.0) / 2.0;
    set_block(x, c0, c0, inverse_wishart_sample(rng, p0, theta.block(0)));
  }
  // Layers: the Schur block from an inverse Wishart, then the normalized
  // cross block from a matrix normal around theta_[j] theta_<j>^{-1} with
  // covariance (1/2) theta_<j>^{-1} (x) w, applied to the already-sampled
  // separator block.
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sj = t.separator(j);
    const auto& rj = t.residual(j);
    const double pj = (delta + t.clique_size(j) - 1.0) / 2.0;
    if (sj.empty()) {
      set_block(x, rj, rj,
                inverse_wishart_sample(rng, pj, submatrix(th, rj)));
      continue;
    }
    const Mat th_s = submatrix(th, sj);
    const Mat th_cross = submatrix(th, rj, sj);
    const Mat th_s_inv = spd_inverse<NotPositiveDefinite>(th_s, "theta sep");
    Mat schur = submatrix(th, rj) - th_cross * th_s_inv * th_cross.transpose();
    schur = ((schur + schur.transpose()) / 2.0).eval();

    const Mat w = inverse_wishart_sample(rng, pj, schur);
    const int m = static_cast<int>(rj.size());
    const int s = static_cast<int>(sj.size());
    Mat z(m, s);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < s; ++b) z(a, b) = rng.normal();
    Eigen::LLT<Mat> lw(w);
    Eigen::LLT<Mat> ls(th_s_inv);
    if (lw.info() != Eigen::Success || ls.info() != Eigen::Success)
      throw NotPositiveDefinite("layer factor");
    const Mat tmat = th_cross * th_s_inv +
                     (Mat(lw.matrixL()) * z * Mat(ls.matrixL()).transpose()) /
                         std::sqrt(2.0);

    const Mat x_sep = submatrix(x, sj);
    const Mat x_cross = tmat * x_sep;
    Mat x_res = w + tmat * x_sep * tmat.transpose();
    x_res = ((x_res + x_res.transpose()) / 2.0).eval();
    set_block(x, rj, sj, x_cross);
    set_block(x, sj, rj, x_cross.transpose());
    set_block(x, rj, rj, x_res);
  }
  return project(x, theta.tree());
}

std::vector<GMatrix> hiw_sample(double delta, const GMatrix& theta, int count,
                                std::uint64_t seed) {
  std::vector<GMatrix> draws;
  draws.reserve(count);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) draws.push_back(hiw_sample_one(delta, theta, rng));
  return draws;
}

int default_thread_count() {
  if (const char* env = std::getenv("CHORDALCOV_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  const int threads = std::min(default_thread_count(), std::max(count, 1));
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

namespace {

constexpr int kLossCount = 4;  // L1_sigma, L2_sigma, L1_omega, L2_omega

struct RepResult {
  std::array<double, kLossCount> losses{};
  bool ok = false;
  Vec sigma_eigs;  // recorded only at the scree sample size
  Vec omega_eigs;
};

Vec sorted_eigs(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  Vec v = es.eigenvalues();
  std::sort(v.data(), v.data() + v.size(), std::greater<double>());
  return v;
}

// One estimator evaluated on one replication.
RepResult evaluate_estimator(const EstimatorSpec& spec, const TrueSigma& truth,
                             const SparsePrecision& truth_omega,
                             const TreePtr& tree, const Mat& data,
                             bool want_eigs) {
  RepResult out;
  const int n = static_cast<int>(data.rows());
  const Mat S = sample_cov(data);
  Mat sigma_for_eigs, omega_for_eigs;

  switch (spec.kind) {
    case EstimatorSpec::Kind::Truth: {
      out.losses = {loss_sigma(truth.sigma, truth.sigma, Loss::L1),
                    loss_sigma(truth.sigma, truth.sigma, Loss::L2),
                    loss_omega(truth_omega, truth_omega, Loss::L1),
                    loss_omega(truth_omega, truth_omega, Loss::L2)};
      sigma_for_eigs = truth.completed;
      omega_for_eigs = truth_omega.dense();
      break;
    }
    case EstimatorSpec::Kind::Mle: {
      Eigen::LLT<Mat> llt(S);
      if (llt.info() != Eigen::Success)
        throw SampleDeficient("sample covariance singular (n <= r)");
      GMatrix ks = project(S, tree);
      Mat omega = llt.solve(Mat::Identity(S.rows(), S.cols()));
      out.losses = {loss_sigma(ks, truth.sigma, Loss::L1),
                    loss_sigma(ks, truth.sigma, Loss::L2),
                    loss_omega(omega, truth_omega, Loss::L1),
                    loss_omega(omega, truth_omega, Loss::L2)};
      sigma_for_eigs = S;
      omega_for_eigs = std::move(omega);
      break;
    }
    case EstimatorSpec::Kind::MleG: {
      GraphicalMle m = mle_g(S, tree);
      out.losses = {loss_sigma(m.sigma, truth.sigma, Loss::L1),
                    loss_sigma(m.sigma, truth.sigma, Loss::L2),
                    loss_omega(m.omega, truth_omega, Loss::L1),
                    loss_omega(m.omega, truth_omega, Loss::L2)};
      sigma_for_eigs = complete(m.sigma);
      omega_for_eigs = m.omega.dense();
      break;
    }
    case EstimatorSpec::Kind::Reference:
    case EstimatorSpec::Kind::Bayes:
    case EstimatorSpec::Kind::EbProportional:
    case EstimatorSpec::Kind::EbAffine: {
      EstimateBundle b = [&]() -> EstimateBundle {
        if (spec.kind == EstimatorSpec::Kind::Reference)
          return reference_bundle(n, S, tree);
        if (spec.kind == EstimatorSpec::Kind::Bayes)
          return bayes_bundle(spec.prior.instantiate(tree), n, S);
        const EbSpec eb = spec.kind == EstimatorSpec::Kind::EbProportional
                              ? EbSpec::Proportional
                              : EbSpec::Affine;
        const EbResult fit = empirical_bayes(data, tree, eb, spec.eb_scale);
        GMatrix theta = spec.eb_scale == PriorSpec::Scale::Calibrated
                            ? calibrate_theta(fit.shape, tree)
                            : identity_gmatrix(tree);
        return bayes_bundle(WpgParams::make(fit.shape, tree, std::move(theta)),
                            n, S);
      }();
      out.losses = {loss_sigma(b.sigma_l1, truth.sigma, Loss::L1),
                    loss_sigma(b.sigma_l2, truth.sigma, Loss::L2),
                    loss_omega(b.omega_l1, truth_omega, Loss::L1),
                    loss_omega(b.omega_l2, truth_omega, Loss::L2)};
      sigma_for_eigs = complete(b.sigma_l2);
      omega_for_eigs = b.omega_l2.dense();
      break;
    }
  }
  if (want_eigs) {
    out.sigma_eigs = sorted_eigs(sigma_for_eigs);
    out.omega_eigs = sorted_eigs(omega_for_eigs);
  }
  out.ok = true;
  return out;
}

}  // namespace

RiskTable run_risk(const SimConfig& cfg) {
  if (cfg.replications < 1) throw DomainError("replications must be >= 1");
  if (cfg.sample_sizes.empty()) throw DomainError("no sample sizes");
  if (cfg.estimators.empty()) throw DomainError("no estimators");

  std::vector<EstimatorSpec> specs;
  for (const auto& s : cfg.estimators) specs.push_back(parse_estimator_spec(s));

  const TrueSigma truth = make_true_sigma(cfg.truth_template, cfg.tree);
  const SparsePrecision truth_omega = completed_inverse(truth.sigma);

  RiskTable table;
  table.estimators = cfg.estimators;
  table.sample_sizes = cfg.sample_sizes;
  const std::vector<std::string> all_losses = {"L1_sigma", "L2_sigma",
                                               "L1_omega", "L2_omega"};
  std::vector<int> loss_index;
  if (cfg.losses.empty()) {
    table.losses = all_losses;
    loss_index = {0, 1, 2, 3};
  } else {
    for (const auto& name : cfg.losses) {
      const auto it = std::find(all_losses.begin(), all_losses.end(), name);
      if (it == all_losses.end())
        throw UsageError("unknown loss '" + name + "'");
      loss_index.push_back(static_cast<int>(it - all_losses.begin()));
      table.losses.push_back(name);
    }
  }

  const int n_count = static_cast<int>(cfg.sample_sizes.size());
  const int e_count = static_cast<int>(specs.size());
  const int reps = cfg.replications;
  const int scree_n_index = n_count - 1;

  // results[n][rep][est]
  std::vector<std::vector<std::vector<RepResult>>> results(n_count);
  for (int ni = 0; ni < n_count; ++ni) {
    results[ni].resize(reps);
    const int n = cfg.sample_sizes[ni];
    parallel_for(reps, [&, ni, n](int rep) {
      const std::uint64_t seed =
          Rng::mix(cfg.seed, static_cast<std::uint64_t>(ni) * reps + rep);
      const Mat data = sample_data(truth.completed, n, seed);
      auto& row = results[ni][rep];
      row.reserve(e_count);
      for (const auto& spec : specs) {
        const bool want_eigs = cfg.record_eigenvalues && ni == scree_n_index;
        try {
          row.push_back(evaluate_estimator(spec, truth, truth_omega, cfg.tree,
                                           data, want_eigs));
        } catch (const Error&) {
          row.push_back(RepResult{});  // infeasible cell for this replication
        }
      }
    });
  }

  // Fixed-order reduction, independent of thread scheduling.
  const int out_losses = static_cast<int>(loss_index.size());
  table.cells.assign(
      e_count, std::vector<std::vector<RiskCell>>(
                   n_count, std::vector<RiskCell>(out_losses)));
  for (int e = 0; e < e_count; ++e)
    for (int ni = 0; ni < n_count; ++ni)
      for (int lo = 0; lo < out_losses; ++lo) {
        const int l = loss_index[lo];
        double sum = 0.0;
        int count = 0;
        for (int rep = 0; rep < reps; ++rep)
          if (results[ni][rep][e].ok) {
            sum += results[ni][rep][e].losses[l];
            ++count;
          }
        RiskCell& cell = table.cells[e][ni][lo];
        cell.count = count;
        cell.missing = count == 0;
        if (count > 0) {
          cell.mean = sum / count;
          double ss = 0.0;
          for (int rep = 0; rep < reps; ++rep)
            if (results[ni][rep][e].ok) {
              const double d = results[ni][rep][e].losses[l] - cell.mean;
              ss += d * d;
            }
          cell.std_error =
              count > 1 ? std::sqrt(ss / (count - 1) / count) : 0.0;
        }
      }

  if (cfg.record_eigenvalues) {
    const int r = cfg.tree->vertex_count();
    table.eigen_labels.push_back("truth");
    table.sigma_eigenvalues.push_back(sorted_eigs(truth.completed));
    table.omega_eigenvalues.push_back(sorted_eigs(truth_omega.dense()));
    for (int e = 0; e < e_count; ++e) {
      Vec sig_acc = Vec::Zero(r), om_acc = Vec::Zero(r);
      int count = 0;
      for (int rep = 0; rep < reps; ++rep) {
        const RepResult& rr = results[scree_n_index][rep][e];
        if (rr.ok && rr.sigma_eigs.size() == static_cast<Eigen::Index>(r)) {
          sig_acc += rr.sigma_eigs;
          om_acc += rr.omega_eigs;
          ++count;
        }
      }
      table.eigen_labels.push_back(cfg.estimators[e]);
      table.sigma_eigenvalues.push_back(count ? Vec(sig_acc / count)
                                              : Vec(Vec::Zero(r)));
      table.omega_eigenvalues.push_back(count ? Vec(om_acc / count)
                                              : Vec(Vec::Zero(r)));
    }
  }
  return table;
}

}  // namespace chordalcov
