#include "chordalcov/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "chordalcov/predict.hpp"
#include "chordalcov/simulate.hpp"

namespace chordalcov {

double log_marginal(const Mat& data, const WpgParams& prior) {
  if (!prior.proper())
    throw DomainError("marginal likelihood requires a proper prior");
  const JunctionTree& t = *prior.tree;
  const int n = static_cast<int>(data.rows());
  const int r = t.vertex_count();
  if (n == 0) return 0.0;
  if (data.cols() != r) throw DomainError("data dimension mismatch");
  const BpReport bp = in_bp(prior.shape, t);
  if (!bp.ok) throw DomainError("prior shape leaves B_P: " + bp.violation);

  const Mat S = sample_cov(data);
  const WpgParams post = posterior_update(prior, n, S);
  // Per-observation constant is pi^{-r/2}: the Gaussian (2 pi)^{-r/2}
  // combined with the on-2-Sigma change of scale; pinned by the r = 1
  // quadrature oracle.
  return -0.5 * n * r * std::log(std::numbers::pi) +
         (log_gamma_ii(post.shape, t) + log_h_g(post.shape, post.theta_ref())) -
         (log_gamma_ii(prior.shape, t) +
          log_h_g(prior.shape, prior.theta_ref()));
}

namespace {

struct Candidate {
  std::string id;
  TreePtr tree;
};

SelectionResult rank_candidates(const Mat& data,
                                const std::vector<Candidate>& candidates,
                                const PriorSpec& prior, Criterion criterion,
                                int folds, int split) {
  SelectionResult out;
  out.criterion = criterion == Criterion::Marginal ? "marginal" : "cv";

  std::vector<ScoredModel> scored;
  if (criterion == Criterion::Marginal) {
    // Candidates are independent; results land in candidate order.
    scored.resize(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), [&](int i) {
      ScoredModel m;
      m.id = candidates[i].id;
      m.edge_count = candidates[i].tree->edge_count();
      m.score = log_marginal(data, prior.instantiate(candidates[i].tree));
      scored[i] = std::move(m);
    });
    // Posterior over the family under a uniform graph prior.
    double max_score = -std::numeric_limits<double>::infinity();
    for (const auto& m : scored) max_score = std::max(max_score, m.score);
    double z = 0.0;
    for (const auto& m : scored) z += std::exp(m.score - max_score);
    for (auto& m : scored) m.posterior = std::exp(m.score - max_score) / z;
  } else {
    Dataset d;
    d.values = data;
    PredictorSpec spec;
    spec.base.kind = prior.is_reference() ? EstimatorSpec::Kind::Reference
                                          : EstimatorSpec::Kind::Bayes;
    spec.base.prior = prior;
    spec.variant = Loss::L1;
    spec.label = prior.label;
    std::vector<TreePtr> trees;
    for (const auto& c : candidates) trees.push_back(c.tree);
    const std::vector<double> errors = kfold_cv(d, trees, folds, spec, split);
    for (size_t i = 0; i < candidates.size(); ++i) {
      ScoredModel m;
      m.id = candidates[i].id;
      m.edge_count = candidates[i].tree->edge_count();
      m.score = errors[i];
      scored.push_back(std::move(m));
    }
  }

  const bool higher_wins = criterion == Criterion::Marginal;
  std::stable_sort(scored.begin(), scored.end(),
                   [&](const ScoredModel& a, const ScoredModel& b) {
                     if (a.score != b.score)
                       return higher_wins ? a.score > b.score
                                          : a.score < b.score;
                     return a.edge_count < b.edge_count;  // ties: smaller model
                   });
  out.ranked = std::move(scored);
  out.best_id = out.ranked.front().id;
  return out;
}

}  // namespace

SelectionResult select_banded(const Mat& data, int kmax, const PriorSpec& prior,
                              Criterion criterion, int folds, int split) {
  const int r = static_cast<int>(data.cols());
  if (kmax < 0 || kmax >= r) throw InvalidBand("need 0 <= kmax < r");
  std::vector<Candidate> candidates;
  for (int k = 0; k <= kmax; ++k)
    candidates.push_back({"band:" + std::to_string(k), share(banded_graph(r, k))});
  return rank_candidates(data, candidates, prior, criterion, folds, split);
}

SelectionResult select_diff_banded(const Mat& data,
                                   const std::vector<std::array<int, 3>>& grid,
                                   const PriorSpec& prior, Criterion criterion,
                                   int folds, int split) {
  const int r = static_cast<int>(data.cols());
  if (grid.empty()) throw DomainError("empty candidate grid");
  std::vector<Candidate> candidates;
  for (const auto& [k1, k2, cp] : grid)
    candidates.push_back(
        {"diffband:" + std::to_string(k1) + ":" + std::to_string(k2) + ":" +
             std::to_string(cp + 1),
         share(diff_banded_graph(r, k1, k2, cp))});
  return rank_candidates(data, candidates, prior, criterion, folds, split);
}

namespace {

double eb_objective(const Mat& data, const TreePtr& tree,
                    const ShapeParams& shape, PriorSpec::Scale scale) {
  if (!in_bp(shape, *tree).ok)
    return -std::numeric_limits<double>::infinity();
  try {
    GMatrix theta = scale == PriorSpec::Scale::Calibrated
                        ? calibrate_theta(shape, tree)
                        : identity_gmatrix(tree);
    return log_marginal(data, WpgParams::make(shape, tree, std::move(theta)));
  } catch (const Error&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Golden-section maximization on [lo, hi] for a unimodal-enough objective;
// preceded by a coarse scan to bracket the best region.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  int iters = 60) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < iters; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

// Compact Nelder-Mead maximization in 2-D.
std::pair<Eigen::Vector2d, double> nelder_mead_2d(
    const std::function<double(const Eigen::Vector2d&)>& f,
    Eigen::Vector2d start, double step, int iters = 300) {
  std::array<Eigen::Vector2d, 3> pts = {
      start, start + Eigen::Vector2d(step, 0.0),
      start + Eigen::Vector2d(0.0, step)};
  std::array<double, 3> vals = {f(pts[0]), f(pts[1]), f(pts[2])};
  auto order = [&] {
    std::array<int, 3> idx = {0, 1, 2};
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return vals[a] > vals[b]; });
    std::array<Eigen::Vector2d, 3> p2;
    std::array<double, 3> v2;
    for (int i = 0; i < 3; ++i) {
      p2[i] = pts[idx[i]];
      v2[i] = vals[idx[i]];
    }
    pts = p2;
    vals = v2;
  };
  for (int it = 0; it < iters; ++it) {
    order();
    const Eigen::Vector2d centroid = (pts[0] + pts[1]) / 2.0;
    const Eigen::Vector2d refl = centroid + (centroid - pts[2]);
    const double f_refl = f(refl);
    if (f_refl > vals[0]) {
      const Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - pts[2]);
      const double f_exp = f(exp_pt);
      if (f_exp > f_refl) {
        pts[2] = exp_pt;
        vals[2] = f_exp;
      } else {
        pts[2] = refl;
        vals[2] = f_refl;
      }
    } else if (f_refl > vals[1]) {
      pts[2] = refl;
      vals[2] = f_refl;
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (pts[2] - centroid);
      const double f_contr = f(contr);
      if (f_contr > vals[2]) {
        pts[2] = contr;
        vals[2] = f_contr;
      } else {
        for (int i = 1; i < 3; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  order();
  return {pts[0], vals[0]};
}

}  // namespace

EbResult empirical_bayes(const Mat& data, TreePtr tree, EbSpec spec,
                         PriorSpec::Scale scale) {
  if (data.rows() == 0) throw NoAdmissiblePoint("no data");
  const JunctionTree& t = *tree;
  double max_c = 0;
  for (int j = 0; j < t.clique_count(); ++j)
    max_c = std::max(max_c, double(t.clique_size(j)));

  // 1-D proportional family: delta in (0, 3 max_c].
  auto prop_objective = [&](double delta) {
    if (delta <= 0.0) return -std::numeric_limits<double>::infinity();
    return eb_objective(data, tree, proportional_shape(delta, t), scale);
  };
  const double delta_hi = 3.0 * max_c;
  double best_delta = 0.0;
  double best_prop = -std::numeric_limits<double>::infinity();
  const int scan = 60;
  for (int i = 0; i < scan; ++i) {
    // log-spaced scan of the admissible interval
    const double delta = delta_hi * std::pow(1e-3, 1.0 - double(i) / (scan - 1));
    const double v = prop_objective(delta);
    if (v > best_prop) {
      best_prop = v;
      best_delta = delta;
    }
  }
  if (!std::isfinite(best_prop))
    throw NoAdmissiblePoint("no admissible shape on the search grid");
  {
    const double lo = best_delta / 3.0, hi = std::min(delta_hi, best_delta * 3.0);
    const double refined = golden_max(prop_objective, lo, hi);
    if (prop_objective(refined) > best_prop) {
      best_prop = prop_objective(refined);
      best_delta = refined;
    }
  }

  if (spec == EbSpec::Proportional) {
    EbResult out;
    out.shape = proportional_shape(best_delta, t);
    out.objective = best_prop;
    out.delta = best_delta;
    return out;
  }

  // 2-D affine family; the proportional optimum maps to
  // (a, b) = (-(delta+1)/2, 1/2) and seeds the search, so the affine
  // optimum can only improve on the proportional one.
  auto affine_objective = [&](const Eigen::Vector2d& ab) {
    return eb_objective(data, tree, affine_shape(ab[0], ab[1], t), scale);
  };
  const Eigen::Vector2d seed(-(best_delta + 1.0) / 2.0, 0.5);
  auto [best_ab, best_affine] = nelder_mead_2d(affine_objective, seed, 0.25);
  // A couple of extra starts to dodge local maxima.
  for (const double mult : {0.5, 2.0}) {
    const Eigen::Vector2d alt(-(best_delta * mult + 1.0) / 2.0, 0.5);
    auto [ab, v] = nelder_mead_2d(affine_objective, alt, 0.5);
    if (v > best_affine) {
      best_affine = v;
      best_ab = ab;
    }
  }
  if (!std::isfinite(best_affine))
    throw NoAdmissiblePoint("no admissible affine shape found");

  EbResult out;
  out.shape = affine_shape(best_ab[0], best_ab[1], t);
  out.objective = best_affine;
  out.a = best_ab[0];
  out.b = best_ab[1];
  return out;
}

}  // namespace chordalcov
