#include <doctest.h>

#include <cmath>

#include "chordalcov/estimators.hpp"
#include "chordalcov/moments.hpp"
#include "chordalcov/simulate.hpp"
#include "test_util.hpp"

using namespace chordalcov;
using namespace ccts;

TEST_CASE("moment existence margins") {
  SUBCASE("scalar alpha = -3 exists") {
    const TreePtr t = complete_tree(1);
    ShapeParams s;
    s.alpha = Vec::Constant(1, -3.0);
    s.beta = Vec(0);
    const MomentReport rep = mean_exists(s, *t);
    CHECK(rep.exists);
    CHECK(rep.margins[0] == doctest::Approx(-2.0));
  }
  SUBCASE("scalar alpha = -1 is on the boundary") {
    const TreePtr t = complete_tree(1);
    ShapeParams s;
    s.alpha = Vec::Constant(1, -1.0);
    s.beta = Vec(0);
    CHECK_FALSE(mean_exists(s, *t).exists);
  }
  SUBCASE("reference posterior on the path at n = 20") {
    const TreePtr t = path_tree(3);
    Rng rng(1);
    const WpgParams post =
        posterior_update(WpgParams::reference(t), 20, random_spd(3, rng));
    const MomentReport rep = mean_exists(post.shape, *t);
    CHECK(rep.exists);
    // alpha_1 + (c_1+1)/2 + gamma_2 = -10 + 1.5 + gamma_2 < 0
    CHECK(rep.margins[0] < 0.0);
    for (double m : rep.margins) CHECK(m < 0.0);
  }
}

TEST_CASE("precision-side mean") {
  SUBCASE("scalar gamma oracle") {
    // half-Omega ~ gamma(shape 3, rate 2) has mean 1.5, so E(Omega) = 3.
    const TreePtr t = complete_tree(1);
    ShapeParams s;
    s.alpha = Vec::Constant(1, -3.0);
    s.beta = Vec(0);
    const WpgParams p =
        WpgParams::make(s, t, project(Mat::Constant(1, 1, 2.0), t));
    CHECK(wpg_mean(p).dense()(0, 0) == doctest::Approx(3.0));
  }
  SUBCASE("path graph prior mean diag(4, 5, 4)") {
    // alpha = (-2, -2), beta_2 = -1.5 at delta = 3, theta = kappa(I):
    // -2[ -2 (I_C1)^0 - 2 (I_C2)^0 + 1.5 (I_S)^0 ] has diagonal (4, 5, 4).
    const TreePtr t = path_tree(3);
    const WpgParams p = WpgParams::hiw(3.0, t, identity_gmatrix(t));
    const Mat m = wpg_mean(p).dense();
    CHECK(m(0, 0) == doctest::Approx(4.0));
    CHECK(m(1, 1) == doctest::Approx(5.0));
    CHECK(m(2, 2) == doctest::Approx(4.0));
    CHECK(m(0, 1) == doctest::Approx(0.0));
  }
  SUBCASE("single-clique reduction to -2 alpha theta^{-1}") {
    Rng rng(2);
    const TreePtr t = complete_tree(3);
    const Mat th = random_spd(3, rng);
    ShapeParams s;
    s.alpha = Vec::Constant(1, -4.0);
    s.beta = Vec(0);
    const WpgParams p = WpgParams::make(s, t, project(th, t));
    const Mat expect = 8.0 * th.inverse();
    CHECK(max_abs(wpg_mean(p).dense() - expect) < 1e-10);
  }
}

TEST_CASE("inverse-side layered mean") {
  SUBCASE("scalar inverse-gamma oracle") {
    const TreePtr t = complete_tree(1);
    ShapeParams s;
    s.alpha = Vec::Constant(1, -3.0);
    s.beta = Vec(0);
    const WpgParams p =
        WpgParams::make(s, t, project(Mat::Constant(1, 1, 4.0), t));
    CHECK(iwpg_mean(p).entry(0, 0) == doctest::Approx(2.0));
  }
  SUBCASE("complete-graph reduction to the inverse Wishart mean") {
    Rng rng(3);
    const TreePtr t = complete_tree(3);
    const Mat th = random_spd(3, rng);
    const double p_shape = 4.0;
    ShapeParams s;
    s.alpha = Vec::Constant(1, -p_shape);
    s.beta = Vec(0);
    const WpgParams p = WpgParams::make(s, t, project(th, t));
    const Mat expect = th / (p_shape - 2.0);  // theta / (p - (r+1)/2)
    CHECK(max_abs(iwpg_mean(p).dense_view() - expect) < 1e-10);
  }
  SUBCASE("calibrated scale gives mean 2I") {
    // factors large enough for the prior mean to exist on each family
    const std::vector<std::pair<TreePtr, double>> cases = {
        {two_clique_tree(8, 6, 2), 0.25},
        {share(banded_graph(10, 3)), 0.75},
        {share(diff_banded_graph(9, 3, 1, 4)), 1.0}};
    for (const auto& [t, factor] : cases) {
      const ShapeParams s = proportional_shape(factor, *t);
      const GMatrix theta = calibrate_theta(s, t);
      const GMatrix mean = iwpg_mean(WpgParams::make(s, t, theta));
      const int r = t->vertex_count();
      const Mat expect = project(2.0 * Mat::Identity(r, r), t).dense_view();
      CHECK(max_abs(mean.dense_view() - expect) < 1e-8);
    }
  }
  SUBCASE("quadrature agreement on the path") {
    const TreePtr t = path_tree(3);
    const WpgParams p = WpgParams::hiw(3.0, t, identity_gmatrix(t));
    const GMatrix closed = iwpg_mean(p);
    const GMatrix quad = quadrature_mean(p);
    CHECK(max_abs(closed.dense_view() - quad.dense_view()) <
          1e-3 * max_abs(quad.dense_view()));
  }
  SUBCASE("quadrature agreement with cross-block couplings in the scale") {
    // a scale with off-diagonal entries exercises the cross-block centering
    Rng rng(29);
    const TreePtr t = path_tree(3);
    for (int trial = 0; trial < 5; ++trial) {
      const GMatrix theta = random_qg(t, rng);
      for (double delta : {2.5, 6.0}) {
        const WpgParams p = WpgParams::hiw(delta, t, theta);
        const GMatrix closed = iwpg_mean(p);
        const GMatrix quad = quadrature_mean(p);
        CHECK(max_abs(closed.dense_view() - quad.dense_view()) <
              1e-3 * max_abs(quad.dense_view()));
      }
    }
  }
  SUBCASE("sampler agreement on the r=12 two-clique graph") {
    const TreePtr t = two_clique_tree(8, 6, 2);
    const double delta = 3.0;
    const GMatrix theta = identity_gmatrix(t);
    const WpgParams p = WpgParams::hiw(delta, t, theta);
    const GMatrix closed = iwpg_mean(p);

    const int draws = 20000;
    const int r = 12;
    Mat mean = Mat::Zero(r, r), m2 = Mat::Zero(r, r);
    Rng rng(2024);
    for (int i = 0; i < draws; ++i) {
      const Mat d = hiw_sample_one(delta, theta, rng).dense_view();
      const Mat delta_m = d - mean;
      mean += delta_m / (i + 1);
      m2 += delta_m.cwiseProduct(d - mean);
    }
    const Mat se = (m2 / (double(draws) * (draws - 1))).cwiseSqrt();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        if (i == j || t->has_edge(i, j)) {
          const double gap = std::abs(mean(i, j) - closed.dense_view()(i, j));
          CHECK(gap <= 4.0 * std::max(se(i, j), 1e-12));
        }
  }
  SUBCASE("moment-deficient shape rejected") {
    const TreePtr t = path_tree(3);
    ShapeParams s = hiw_shape(3.0, *t);
    s.alpha = Vec::Constant(2, -1.0);  // margins nonnegative
    CHECK_THROWS_AS(iwpg_mean(WpgParams::make(s, t, identity_gmatrix(t))),
                    MomentUndefined);
  }
}

TEST_CASE("posterior mean of Sigma") {
  SUBCASE("complete graph reduces to (nu D + n S)/(nu + n - r - 1)") {
    Rng rng(4);
    const int r = 3, n = 20;
    const TreePtr t = complete_tree(r);
    const Mat D = random_spd(r, rng);
    const double nu = 9.0;
    const Mat data = sample_data(Mat::Identity(r, r), n, 7);
    const Mat S = sample_cov(data);

    ShapeParams s;
    s.alpha = Vec::Constant(1, -nu / 2.0);
    s.beta = Vec(0);
    // the prior on 2 Sigma carries scale nu D so that E(Sigma) matches the
    // saturated-model posterior mean formula
    const WpgParams prior = WpgParams::make(s, t, project(nu * D, t));
    const Mat post = complete(posterior_mean_sigma(prior, n, S));
    const Mat expect = (nu * D + n * S) / (nu + n - r - 1.0);
    CHECK(max_abs(post - expect) < 1e-9 * max_abs(expect));
  }
  SUBCASE("posterior concentrates at kappa(S) as n grows") {
    const TreePtr t = path_tree(3);
    Mat S = Mat::Identity(3, 3);
    S(0, 1) = S(1, 0) = 0.4;
    S(1, 2) = S(2, 1) = 0.3;
    const WpgParams prior = WpgParams::hiw(3.0, t, identity_gmatrix(t));
    const GMatrix ks = project(S, t);
    double prev = -1.0;
    for (int n : {100, 200, 400, 800}) {
      const GMatrix post = posterior_mean_sigma(prior, n, S);
      const double dev = max_abs(post.dense_view() - ks.dense_view());
      if (prev > 0.0) CHECK(dev < 0.62 * prev);
      prev = dev;
    }
  }
  SUBCASE("scalar reference posterior matches quadrature") {
    // r=1, n=5, sum of squares 10: E(sigma^2 | data) = 10/(n - 2) = 10/3.
    const TreePtr t = complete_tree(1);
    const Mat S = Mat::Constant(1, 1, 2.0);  // n S = 10
    const int n = 5;
    const GMatrix post_mean =
        posterior_mean_sigma(WpgParams::reference(t), n, S);
    const WpgParams post = posterior_update(WpgParams::reference(t), n, S);
    const GMatrix quad = quadrature_mean(post);
    CHECK(post_mean.entry(0, 0) ==
          doctest::Approx(quad.entry(0, 0) / 2.0).epsilon(1e-4));
    CHECK(post_mean.entry(0, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("reference posterior mean of Omega") {
  SUBCASE("complete graph gives S^{-1}") {
    Rng rng(5);
    const TreePtr t = complete_tree(4);
    const Mat S = random_spd(4, rng);
    const SparsePrecision omega = reference_mean_omega(10, S, t);
    CHECK(max_abs(omega.dense() - S.inverse()) < 1e-9);
  }
  SUBCASE("path graph, S = I, n = 10: middle diagonal 1.2") {
    const TreePtr t = path_tree(3);
    const SparsePrecision omega =
        reference_mean_omega(10, Mat::Identity(3, 3), t);
    CHECK(omega.dense()(1, 1) == doctest::Approx(1.2));
    CHECK(omega.dense()(0, 0) == doctest::Approx(1.0));
  }
  SUBCASE("difference to the graphical mle halves as n doubles") {
    Rng rng(6);
    const TreePtr t = two_clique_tree(5, 4, 2);
    const Mat S = random_spd(7, rng);
    const Mat mle = mle_g(S, t).omega.dense();
    double prev = -1.0;
    for (int n : {100, 200, 400, 800, 1600}) {
      const double dev = max_abs(reference_mean_omega(n, S, t).dense() - mle);
      if (prev > 0.0) CHECK(dev == doctest::Approx(prev / 2.0).epsilon(1e-6));
      prev = dev;
    }
  }
  SUBCASE("matches the generic posterior-mean machinery") {
    Rng rng(7);
    const TreePtr t = share(banded_graph(6, 2));
    const Mat S = random_spd(6, rng);
    const int n = 25;
    const SparsePrecision closed = reference_mean_omega(n, S, t);
    const SparsePrecision generic =
        wpg_mean(WpgParams::reference(t), n, S);
    CHECK(max_abs(closed.dense() - generic.dense()) < 1e-10);
  }
}

TEST_CASE("layered mean produces a consistent Q_G element") {
  Rng rng(8);
  const TreePtr t = share(banded_graph(7, 2));
  const ShapeParams s = proportional_shape(1.0, *t);
  const WpgParams p = WpgParams::make(s, t, random_qg(t, rng));
  const GMatrix mean = iwpg_mean(p);
  for (int j = 1; j < t->clique_count(); ++j) {
    const Mat sub = mean.clique_submatrix(t->separator(j));
    CHECK(is_symmetric(sub, 1e-12));
    CHECK(is_spd(sub));
  }
  CHECK(mean.in_qg());
}
