#include <doctest.h>

#include "chordalcov/chordal_matrix.hpp"
#include "test_util.hpp"

using namespace chordalcov;
using namespace ccts;

TEST_CASE("projection keeps pattern entries and drops the rest") {
  const TreePtr t = path_tree(3);
  SUBCASE("identity") {
    const GMatrix x = project(Mat::Identity(3, 3), t);
    CHECK(x.dense_view() == Mat::Identity(3, 3));
    for (const auto& b : x.blocks()) CHECK(b == Mat::Identity(2, 2));
  }
  SUBCASE("entry (1,3) dropped on the path") {
    Mat m(3, 3);
    m << 1.0, 0.5, 0.9, 0.5, 1.0, 0.5, 0.9, 0.5, 1.0;
    const GMatrix x = project(m, t);
    CHECK(x.entry(0, 2) == 0.0);
    CHECK(x.entry(0, 1) == 0.5);
  }
  SUBCASE("projection is lossless on the complete graph") {
    Rng rng(11);
    const TreePtr tc = complete_tree(4);
    const Mat s = random_spd(4, rng);
    const GMatrix x = project(s, tc);
    CHECK(max_abs(complete(x) - s) < 1e-12);
  }
}

TEST_CASE("completion") {
  SUBCASE("path graph, rho = 0.5 completes to 0.25") {
    const TreePtr t = path_tree(3);
    const GMatrix x = path_edge_matrix(3, 0.5, t);
    const Mat xhat = complete(x);
    CHECK(xhat(0, 2) == doctest::Approx(0.25).epsilon(1e-12));
    // fixed point: projection of the completion reproduces stored entries
    const GMatrix back = project(xhat, t);
    CHECK(max_abs(back.dense_view() - x.dense_view()) == 0.0);
  }
  SUBCASE("off-pattern zeros of the completion inverse, two-clique r=12") {
    Rng rng(5);
    const TreePtr t = two_clique_tree(8, 6, 2);
    for (int trial = 0; trial < 20; ++trial) {
      const GMatrix x = random_qg(t, rng);
      const Mat xhat = complete(x);
      const Mat inv = xhat.llt().solve(Mat::Identity(12, 12));
      double worst = 0.0;
      for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j)
          if (i != j && !t->has_edge(i, j))
            worst = std::max(worst, std::abs(inv(i, j)));
      CHECK(worst <= 1e-10 * max_abs(inv));
    }
  }
  SUBCASE("non positive definite block rejected") {
    const TreePtr t = path_tree(3);
    const GMatrix x = path_edge_matrix(3, 1.5, t);  // blocks indefinite
    CHECK_THROWS_AS(complete(x), NotInQG);
  }
}

TEST_CASE("phi and completion invert each other") {
  Rng rng(17);
  const TreePtr t = path_tree(4);
  SUBCASE("identity") {
    const SparsePrecision y =
        SparsePrecision::from_dense(t, Mat::Identity(4, 4));
    const GMatrix x = phi(y);
    CHECK(max_abs(x.dense_view() - Mat::Identity(4, 4)) < 1e-14);
  }
  SUBCASE("round trip from P_G") {
    for (int trial = 0; trial < 10; ++trial) {
      const GMatrix x = random_qg(t, rng);
      const SparsePrecision y = completed_inverse(x);
      const GMatrix back = phi(y);
      CHECK(max_abs(back.dense_view() - x.dense_view()) < 1e-10);
    }
  }
  SUBCASE("round trip of the 0.5-path completion") {
    const TreePtr t3 = path_tree(3);
    const GMatrix x = path_edge_matrix(3, 0.5, t3);
    const SparsePrecision y = completed_inverse(x);
    const GMatrix back = phi(y);
    CHECK(max_abs(back.dense_view() - x.dense_view()) < 1e-12);
  }
}

TEST_CASE("edge inner product equals the dense trace") {
  Rng rng(23);
  SUBCASE("identity pair") {
    const TreePtr t = path_tree(5);
    const GMatrix x = project(Mat::Identity(5, 5), t);
    const SparsePrecision y =
        SparsePrecision::from_dense(t, Mat::Identity(5, 5));
    CHECK(edge_inner_product(x, y) == doctest::Approx(5.0));
  }
  SUBCASE("random instances match trace(complete(x) y)") {
    const TreePtr t = path_tree(3);
    for (int trial = 0; trial < 10; ++trial) {
      const GMatrix x = random_qg(t, rng);
      const GMatrix sigma = random_qg(t, rng);
      const SparsePrecision y = completed_inverse(sigma);
      const double lhs = edge_inner_product(x, y);
      const double dense = (complete(x) * y.dense()).trace();
      CHECK(lhs == doctest::Approx(dense).epsilon(1e-12));
      // clique/separator decomposition of the same pairing
      double dec = 0.0;
      for (int j = 0; j < t->clique_count(); ++j) {
        const Mat inv = sigma.block(j).llt().solve(Mat::Identity(2, 2));
        dec += (x.block(j).array() * inv.array()).sum();
      }
      for (int j = 1; j < t->clique_count(); ++j) {
        const auto& sep = t->separator(j);
        const Mat inv =
            sigma.clique_submatrix(sep).llt().solve(Mat::Identity(1, 1));
        dec -= (x.clique_submatrix(sep).array() * inv.array()).sum();
      }
      CHECK(dec == doctest::Approx(dense).epsilon(1e-12));
    }
  }
  SUBCASE("tree mismatch rejected") {
    const GMatrix x = project(Mat::Identity(3, 3), path_tree(3));
    const SparsePrecision y =
        SparsePrecision::from_dense(complete_tree(3), Mat::Identity(3, 3));
    CHECK_THROWS_AS(edge_inner_product(x, y), TreeMismatch);
  }
}

TEST_CASE("log determinant of the completion") {
  SUBCASE("path graph rho = 0.5") {
    const TreePtr t = path_tree(3);
    const GMatrix x = path_edge_matrix(3, 0.5, t);
    // dense determinant of the completed matrix is 0.5625
    CHECK(logdet_completed(x) ==
          doctest::Approx(std::log(0.5625)).epsilon(1e-12));
  }
  SUBCASE("identity") {
    const TreePtr t = two_clique_tree(4, 3, 1);
    CHECK(logdet_completed(project(Mat::Identity(6, 6), t)) ==
          doctest::Approx(0.0));
  }
  SUBCASE("random two-clique instances match the dense oracle") {
    Rng rng(31);
    const TreePtr t = two_clique_tree(5, 4, 2);
    for (int trial = 0; trial < 10; ++trial) {
      const GMatrix x = random_qg(t, rng);
      const Mat xhat = complete(x);
      const double dense = std::log(xhat.determinant());
      CHECK(logdet_completed(x) ==
            doctest::Approx(dense).epsilon(1e-10));
    }
  }
}

TEST_CASE("layer blocks") {
  SUBCASE("path graph scalar Schur complement") {
    const TreePtr t = path_tree(3);
    const GMatrix x = path_edge_matrix(3, 0.5, t);
    const LayerBlocks lb = layer_blocks(x, 1);
    CHECK(lb.sep(0, 0) == doctest::Approx(1.0));
    CHECK(lb.cross(0, 0) == doctest::Approx(0.5));
    CHECK(lb.schur(0, 0) == doctest::Approx(0.75));
  }
  SUBCASE("zero couplings leave the residual block") {
    const TreePtr t = two_clique_tree(3, 3, 1);
    Mat m = Mat::Identity(5, 5) * 2.0;
    const GMatrix x = project(m, t);
    const LayerBlocks lb = layer_blocks(x, 1);
    CHECK(max_abs(lb.schur - 2.0 * Mat::Identity(2, 2)) < 1e-14);
  }
  SUBCASE("Schur determinant identity") {
    Rng rng(41);
    const TreePtr t = two_clique_tree(4, 4, 2);
    for (int trial = 0; trial < 10; ++trial) {
      const GMatrix x = random_qg(t, rng);
      for (int j = 0; j < t->clique_count(); ++j) {
        const LayerBlocks lb = layer_blocks(x, j);
        const Mat block =
            j == 0 ? x.block(0) : x.clique_submatrix(t->clique(j));
        const double lhs = block.determinant();
        const double rhs = (lb.sep.rows() ? lb.sep.determinant() : 1.0) *
                           lb.schur.determinant();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
      }
    }
  }
  SUBCASE("index out of range") {
    const GMatrix x = project(Mat::Identity(3, 3), path_tree(3));
    CHECK_THROWS_AS(layer_blocks(x, 5), IndexOutOfRange);
  }
}

TEST_CASE("from_blocks enforces overlap consistency") {
  const TreePtr t = path_tree(3);
  std::vector<Mat> blocks(2, Mat::Identity(2, 2));
  const GMatrix ok = GMatrix::from_blocks(t, blocks);
  CHECK(ok.entry(1, 1) == 1.0);
  blocks[1](0, 0) = 2.0;  // disagrees with block 0 at the shared vertex
  CHECK_THROWS_AS(GMatrix::from_blocks(t, blocks), NotInQG);
}
