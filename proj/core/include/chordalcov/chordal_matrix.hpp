#pragma once

#include <memory>
#include <vector>

#include "chordalcov/graph.hpp"
#include "chordalcov/linalg.hpp"

namespace chordalcov {

// Incomplete symmetric matrix with entries on the edge pattern of a
// decomposable graph only, stored as the ordered list of clique blocks
// x_{C_j} plus an assembled pattern view (zeros off the pattern, which are
// placeholders, not values). Membership in the cone Q_G additionally
// requires every clique block to be positive definite.
class GMatrix {
 public:
  // Builds from per-clique blocks; entries shared between cliques must
  // agree exactly, otherwise NotInQG is thrown.
  static GMatrix from_blocks(TreePtr tree, std::vector<Mat> blocks);

  const TreePtr& tree() const { return tree_; }
  int dim() const { return tree_->vertex_count(); }
  const std::vector<Mat>& blocks() const { return blocks_; }
  const Mat& block(int j) const { return blocks_.at(j); }
  // Assembled view with zeros off the pattern.
  const Mat& dense_view() const { return dense_; }
  double entry(int i, int j) const { return dense_(i, j); }

  Mat clique_submatrix(const std::vector<int>& idx) const {
    return submatrix(dense_, idx);
  }

  bool in_qg() const;
  void require_in_qg(const char* context) const;

 private:
  friend GMatrix project(const Mat&, TreePtr);
  GMatrix() = default;

  TreePtr tree_;
  std::vector<Mat> blocks_;
  Mat dense_;
};

// Symmetric positive definite matrix with structural zeros off the edge
// pattern: an element of P_G.
class SparsePrecision {
 public:
  // check_pd: verify positive definiteness up front (Cholesky).
  static SparsePrecision from_dense(TreePtr tree, Mat values,
                                    bool check_pd = true);

  const TreePtr& tree() const { return tree_; }
  int dim() const { return tree_->vertex_count(); }
  const Mat& dense() const { return dense_; }

 private:
  SparsePrecision() = default;
  TreePtr tree_;
  Mat dense_;
};

// kappa: drops entries off the edge pattern. Positivity is not required.
GMatrix project(const Mat& m, TreePtr tree);

// Unique positive definite completion of x in Q_G; the inverse of the
// completion has zeros off the pattern.
Mat complete(const GMatrix& x);

// The inverse of the completion, computed clique-locally:
// y = sum_C (x_C^{-1})^0 - sum_S nu(S) (x_S^{-1})^0.
SparsePrecision completed_inverse(const GMatrix& x);

// phi: y in P_G -> kappa(y^{-1}) in Q_G.
GMatrix phi(const SparsePrecision& y);

// <x, y> over the diagonal and both orientations of each edge; equals
// tr(complete(x) y) for x in Q_G, y in P_G.
double edge_inner_product(const GMatrix& x, const SparsePrecision& y);

// log det of the completion via the clique/separator factorization.
double logdet_completed(const GMatrix& x);

// Blocks of layer j: the separator block x_<j>, the cross block
// x_[j] = x_{R_j,S_j}, and the Schur complement x_[j]. . For j = 0 the
// first-clique variant is returned: (x_{S_2}, x_{C_1\S_2,S_2}, x_[1].).
struct LayerBlocks {
  Mat sep;
  Mat cross;
  Mat schur;
};
LayerBlocks layer_blocks(const GMatrix& x, int j);

// Blockwise sum and scaling; both preserve overlap consistency exactly.
GMatrix add(const GMatrix& a, const GMatrix& b);
GMatrix scale(const GMatrix& a, double c);

// kappa(c * I) on the given tree.
GMatrix identity_gmatrix(TreePtr tree, double c = 1.0);

}  // namespace chordalcov
