#include "chordalcov/moments.hpp"

#include <algorithm>
#include <cmath>

namespace chordalcov {

namespace {

constexpr double kBoundarySlack = 1e-6;

// psi = theta + kappa(nS); shape shifted by n/2.
struct Posterior {
  ShapeParams shape;
  GMatrix psi;
};

Posterior effective_params(const WpgParams& p, int n, const Mat* S) {
  if (n == 0) {
    if (!p.proper())
      throw DomainError("prior moment of an improper prior is undefined");
    return {p.shape, p.theta_ref()};
  }
  WpgParams post = posterior_update(p, n, *S);
  return {std::move(post.shape), std::move(*post.theta)};
}

}  // namespace

MomentReport mean_exists(const ShapeParams& s, const JunctionTree& t) {
  MomentReport rep;
  const int c1 = t.clique_size(0);
  const int s2 = t.s2();
  rep.margins.push_back(s.alpha[0] + (c1 + 1) / 2.0 + gamma2(s, t));
  rep.labels.push_back("alpha_1 + (c_1+1)/2 + gamma_2");
  rep.margins.push_back(s.alpha[0] + (c1 - s2 + 1) / 2.0);
  rep.labels.push_back("alpha_1 + (c_1-s_2+1)/2");
  for (int j = 1; j < t.clique_count(); ++j) {
    rep.margins.push_back(
        s.alpha[j] + (t.clique_size(j) - t.separator_size(j) + 1) / 2.0);
    rep.labels.push_back("alpha_" + std::to_string(j + 1) +
                         " + (c-s+1)/2");
  }
  rep.exists = std::all_of(rep.margins.begin(), rep.margins.end(),
                           [](double m) { return m < 0.0; });
  return rep;
}

SparsePrecision wpg_mean(const WpgParams& p) { return wpg_mean(p, 0, Mat()); }

SparsePrecision wpg_mean(const WpgParams& p, int n, const Mat& S) {
  const Posterior eff = effective_params(p, n, n > 0 ? &S : nullptr);
  const JunctionTree& t = *p.tree;
  const int r = t.vertex_count();
  eff.psi.require_in_qg("wpg_mean scale");

  Mat acc = Mat::Zero(r, r);
  for (int j = 0; j < t.clique_count(); ++j) {
    Mat inv = spd_inverse<NotInQG>(eff.psi.block(j), "clique");
    inv *= -2.0 * eff.shape.alpha[j];
    add_block_into(acc, t.clique(j), inv);
  }
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sep = t.separator(j);
    if (sep.empty()) continue;
    Mat inv =
        spd_inverse<NotInQG>(eff.psi.clique_submatrix(sep), "separator");
    inv *= 2.0 * eff.shape.beta[j - 1];
    add_block_into(acc, sep, inv);
  }
  acc = ((acc + acc.transpose()) / 2.0).eval();
  return SparsePrecision::from_dense(p.tree, std::move(acc), true);
}

GMatrix iwpg_mean(const WpgParams& p) {
  const JunctionTree& t = *p.tree;
  const GMatrix& theta = p.theta_ref();
  theta.require_in_qg("iwpg_mean scale");

  const MomentReport rep = mean_exists(p.shape, t);
  for (double m : rep.margins)
    if (m >= -kBoundarySlack)
      throw MomentUndefined("existence margin " + std::to_string(m) +
                            " is not safely negative");

  const int k = t.clique_count();
  const int r = t.vertex_count();
  const int c1 = t.clique_size(0);
  const int s2 = t.s2();
  const double g2 = gamma2(p.shape, t);
  const double d2 = -(p.shape.alpha[0] + (c1 + 1) / 2.0 + g2);
  const double dm = -(p.shape.alpha[0] + (c1 - s2 + 1) / 2.0);

  Mat mean = Mat::Zero(r, r);

  // First clique: separator block, cross block, residual block.
  std::vector<int> sep2;
  if (k > 1) sep2 = t.separator(1);
  std::vector<int> rest;
  for (int v : t.clique(0))
    if (std::find(sep2.begin(), sep2.end(), v) == sep2.end())
      rest.push_back(v);

  const Mat& th = theta.dense_view();
  if (!sep2.empty()) {
    Mat th_s = submatrix(th, sep2);
    Mat th_cross = submatrix(th, rest, sep2);
    Mat th_s_inv = spd_inverse<NotInQG>(th_s, "theta separator");
    Mat th_rest = submatrix(th, rest);
    Mat schur = th_rest - th_cross * th_s_inv * th_cross.transpose();

    set_block(mean, sep2, sep2, th_s / d2);
    Mat e_cross = th_cross / d2;
    set_block(mean, rest, sep2, e_cross);
    set_block(mean, sep2, rest, e_cross.transpose());
    const double corr = 1.0 + s2 / (2.0 * d2);
    Mat e_rest =
        schur / dm * corr + th_cross * th_s_inv * th_cross.transpose() / d2;
    set_block(mean, rest, rest, ((e_rest + e_rest.transpose()) / 2.0).eval());
  } else {
    set_block(mean, rest, rest, submatrix(th, rest) / d2);
  }

  // Layers j >= 2: the separator expectation is read from the assembled
  // earlier layers (S_j is contained in the history).
  for (int j = 1; j < k; ++j) {
    const auto& sj = t.separator(j);
    const auto& rj = t.residual(j);
    const double dj = -(p.shape.alpha[j] +
                        (t.clique_size(j) - t.separator_size(j) + 1) / 2.0);
    Mat th_rj = submatrix(th, rj);
    if (sj.empty()) {
      set_block(mean, rj, rj, th_rj / dj);
      continue;
    }
    Mat th_sj = submatrix(th, sj);
    Mat th_cross = submatrix(th, rj, sj);
    Mat th_sj_inv = spd_inverse<NotInQG>(th_sj, "theta separator");
    Mat schur = th_rj - th_cross * th_sj_inv * th_cross.transpose();
    Mat e_sep = submatrix(mean, sj);

    Mat m_cross = th_cross * th_sj_inv;  // theta_[j] theta_<j>^{-1}
    Mat e_cross = m_cross * e_sep;
    set_block(mean, rj, sj, e_cross);
    set_block(mean, sj, rj, e_cross.transpose());
    const double tr_term = 1.0 + 0.5 * (th_sj_inv * e_sep).trace();
    Mat e_rj = schur / dj * tr_term + m_cross * e_sep * m_cross.transpose();
    set_block(mean, rj, rj, ((e_rj + e_rj.transpose()) / 2.0).eval());
  }

  mean = ((mean + mean.transpose()) / 2.0).eval();
  GMatrix out = project(mean, p.tree);
  out.require_in_qg("iwpg_mean result");
  return out;
}

GMatrix posterior_mean_sigma(const WpgParams& prior, int n, const Mat& S) {
  WpgParams post = posterior_update(prior, n, S);
  return scale(iwpg_mean(post), 0.5);
}

SparsePrecision reference_mean_omega(int n, const Mat& S, TreePtr tree) {
  const JunctionTree& t = *tree;
  if (n < 1) throw DomainError("need n >= 1");
  GMatrix ks = project(S, tree);
  if (!ks.in_qg())
    throw SampleDeficient(
        "a clique block of the sample covariance is singular");
  const int r = t.vertex_count();
  Mat acc = Mat::Zero(r, r);
  for (int j = 0; j < t.clique_count(); ++j)
    add_block_into(acc, t.clique(j),
                   spd_inverse<SampleDeficient>(ks.block(j), "clique"));
  const int c1 = t.clique_size(0);
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& sep = t.separator(j);
    if (sep.empty()) continue;
    double coef;
    if (j == 1) {
      coef = 1.0 - (c1 + t.clique_size(1) - 2.0 * t.separator_size(1)) / n;
    } else {
      coef = 1.0 - (t.clique_size(j) - t.separator_size(j)) / double(n);
    }
    Mat inv = spd_inverse<SampleDeficient>(ks.clique_submatrix(sep),
                                           "separator");
    inv *= -coef;
    add_block_into(acc, sep, inv);
  }
  acc = ((acc + acc.transpose()) / 2.0).eval();
  return SparsePrecision::from_dense(tree, std::move(acc), true);
}

}  // namespace chordalcov
