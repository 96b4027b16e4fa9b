#include "chordalcov/estimators.hpp"

#include <cmath>

namespace chordalcov {

Mat sample_cov(const Mat& data) {
  if (data.rows() == 0) throw EmptyData("no observations");
  Mat S = data.transpose() * data / double(data.rows());
  return ((S + S.transpose()) / 2.0).eval();
}

CenteredCov sample_cov_centered(const Mat& data) {
  if (data.rows() == 0) throw EmptyData("no observations");
  CenteredCov out;
  out.mu = data.colwise().mean();
  Mat centered = data.rowwise() - out.mu.transpose();
  out.S = centered.transpose() * centered / double(data.rows());
  out.S = ((out.S + out.S.transpose()) / 2.0).eval();
  return out;
}

GraphicalMle mle_g(const Mat& S, TreePtr tree) {
  GMatrix ks = project(S, tree);
  const JunctionTree& t = *tree;
  const int r = t.vertex_count();
  Mat acc = Mat::Zero(r, r);
  for (int j = 0; j < t.clique_count(); ++j)
    add_block_into(acc, t.clique(j),
                   spd_inverse<SampleDeficient>(ks.block(j), "clique block"));
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sep = t.separator(j);
    if (sep.empty()) continue;
    Mat inv = spd_inverse<SampleDeficient>(ks.clique_submatrix(sep),
                                           "separator block");
    for (size_t a = 0; a < sep.size(); ++a)
      for (size_t b = 0; b < sep.size(); ++b) acc(sep[a], sep[b]) -= inv(a, b);
  }
  acc = ((acc + acc.transpose()) / 2.0).eval();
  SparsePrecision omega = SparsePrecision::from_dense(tree, std::move(acc), true);
  GMatrix sigma = phi(omega);
  return GraphicalMle{std::move(omega), std::move(sigma)};
}

namespace {

// Assembles the four estimators from a proper posterior.
EstimateBundle bundle_from_posterior(const WpgParams& post, int n) {
  const BpReport bp = in_bp(post.shape, *post.tree);
  if (!bp.ok)
    throw DomainError("posterior shape leaves B_P: " + bp.violation);

  // E(Omega | data): Bayes under squared error for Omega.
  SparsePrecision omega_l2 = wpg_mean(post);
  // E(Sigma | data) = layered mean of the posterior over 2*Sigma, halved.
  GMatrix sigma_l2 = scale(iwpg_mean(post), 0.5);
  // kappa([E(Sigma_hat^{-1})]^{-1}) = phi of the posterior mean of Omega.
  GMatrix sigma_l1 = phi(omega_l2);
  // [E(Sigma) completed]^{-1}; completion commutes with positive scaling.
  SparsePrecision omega_l1 = completed_inverse(sigma_l2);
  return EstimateBundle{std::move(sigma_l1), std::move(sigma_l2),
                        std::move(omega_l1), std::move(omega_l2), "", n};
}

}  // namespace

EstimateBundle bayes_bundle(const WpgParams& prior, int n, const Mat& S) {
  WpgParams post = posterior_update(prior, n, S);
  return bundle_from_posterior(post, n);
}

EstimateBundle reference_bundle(int n, const Mat& S, TreePtr tree) {
  WpgParams post =
      posterior_update(WpgParams::reference(std::move(tree)), n, S);
  return bundle_from_posterior(post, n);
}

double loss_sigma(const GMatrix& est, const GMatrix& truth, Loss kind) {
  if (!est.tree()->same_structure(*truth.tree()))
    throw TreeMismatch("loss operands on different trees");
  const JunctionTree& t = *truth.tree();
  if (kind == Loss::L2) {
    double acc = 0.0;
    const int r = t.vertex_count();
    for (int i = 0; i < r; ++i) {
      const double d = est.entry(i, i) - truth.entry(i, i);
      acc += d * d;
    }
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        if (t.has_edge(i, j)) {
          const double d = est.entry(i, j) - truth.entry(i, j);
          acc += 2.0 * d * d;
        }
    return acc;
  }
  // L1 via the clique/separator factorizations; no dense completion.
  truth.require_in_qg("loss_sigma truth");
  est.require_in_qg("loss_sigma estimate");
  double ip = 0.0;
  for (int j = 0; j < t.clique_count(); ++j) {
    Mat inv = spd_inverse<NotInQG>(truth.block(j), "truth clique");
    ip += (est.block(j).array() * inv.array()).sum();
  }
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sep = t.separator(j);
    if (sep.empty()) continue;
    Mat inv = spd_inverse<NotInQG>(truth.clique_submatrix(sep), "truth sep");
    ip -= (est.clique_submatrix(sep).array() * inv.array()).sum();
  }
  return ip - (logdet_completed(est) - logdet_completed(truth)) -
         t.vertex_count();
}

double loss_omega(const Mat& est, const SparsePrecision& truth, Loss kind) {
  const JunctionTree& t = *truth.tree();
  const int r = t.vertex_count();
  if (est.rows() != r || est.cols() != r)
    throw DomainError("loss dimension mismatch");
  if (kind == Loss::L2) {
    double acc = 0.0;
    for (int i = 0; i < r; ++i) {
      const double d = est(i, i) - truth.dense()(i, i);
      acc += d * d;
    }
    for (int i = 0; i < r; ++i)
      for (int j = i + 1; j < r; ++j)
        if (t.has_edge(i, j)) {
          const double d = est(i, j) - truth.dense()(i, j);
          acc += 2.0 * d * d;
        }
    return acc;
  }
  Eigen::LLT<Mat> truth_llt(truth.dense());
  if (truth_llt.info() != Eigen::Success)
    throw NotPositiveDefinite("loss_omega truth");
  const double tr = (est * truth_llt.solve(Mat::Identity(r, r))).trace();
  const double logdet_est = spd_logdet<NotPositiveDefinite>(est, "estimate");
  const double logdet_truth =
      spd_logdet<NotPositiveDefinite>(truth.dense(), "truth");
  return tr - (logdet_est - logdet_truth) - r;
}

double loss_omega(const SparsePrecision& est, const SparsePrecision& truth,
                  Loss kind) {
  if (!est.tree()->same_structure(*truth.tree()))
    throw TreeMismatch("loss operands on different trees");
  return loss_omega(est.dense(), truth, kind);
}

Mat saturated_posterior_mean(double nu, const Mat& D, int n, const Mat& S) {
  const int r = static_cast<int>(S.rows());
  const double denom = nu + n - r - 1.0;
  if (denom <= 0.0)
    throw DomainError("nu + n - r - 1 must be positive, got " +
                      std::to_string(denom));
  return (nu * D + n * S) / denom;
}

}  // namespace chordalcov
