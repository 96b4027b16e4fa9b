#include "chordalcov/chordal_matrix.hpp"

#include <algorithm>
#include <cmath>

namespace chordalcov {

namespace {

void check_same_tree(const TreePtr& a, const TreePtr& b) {
  if (a == b) return;
  if (!a->same_structure(*b))
    throw TreeMismatch("operands built on different junction trees");
}

}  // namespace

GMatrix GMatrix::from_blocks(TreePtr tree, std::vector<Mat> blocks) {
  if (static_cast<int>(blocks.size()) != tree->clique_count())
    throw DomainError("expected one block per clique");
  const int r = tree->vertex_count();
  GMatrix x;
  x.dense_ = Mat::Zero(r, r);
  Mat written = Mat::Zero(r, r);  // 1 where an entry has been set
  for (int j = 0; j < tree->clique_count(); ++j) {
    const auto& c = tree->clique(j);
    const Mat& b = blocks[j];
    if (b.rows() != static_cast<long>(c.size()) || b.cols() != b.rows())
      throw DomainError("block " + std::to_string(j) + " has wrong shape");
    if (!is_symmetric(b))
      throw DomainError("block " + std::to_string(j) + " is not symmetric");
    for (size_t a = 0; a < c.size(); ++a)
      for (size_t d = 0; d < c.size(); ++d) {
        if (written(c[a], c[d]) != 0.0 && x.dense_(c[a], c[d]) != b(a, d))
          throw NotInQG("overlap inconsistency at entry (" +
                        std::to_string(c[a] + 1) + "," +
                        std::to_string(c[d] + 1) + ")");
        x.dense_(c[a], c[d]) = b(a, d);
        written(c[a], c[d]) = 1.0;
      }
  }
  x.tree_ = std::move(tree);
  x.blocks_ = std::move(blocks);
  return x;
}

bool GMatrix::in_qg() const {
  for (const Mat& b : blocks_)
    if (!is_spd(b)) return false;
  return true;
}

void GMatrix::require_in_qg(const char* context) const {
  for (size_t j = 0; j < blocks_.size(); ++j)
    if (!is_spd(blocks_[j]))
      throw NotInQG(std::string(context) + ": clique block " +
                    std::to_string(j) + " fails Cholesky");
}

SparsePrecision SparsePrecision::from_dense(TreePtr tree, Mat values,
                                            bool check_pd) {
  const int r = tree->vertex_count();
  if (values.rows() != r || values.cols() != r)
    throw DomainError("dimension mismatch");
  if (!is_symmetric(values)) throw DomainError("matrix is not symmetric");
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      if (i != j && !tree->has_edge(i, j)) values(i, j) = 0.0;
  if (check_pd && !is_spd(values))
    throw NotPositiveDefinite("P_G element fails Cholesky");
  SparsePrecision y;
  y.tree_ = std::move(tree);
  y.dense_ = std::move(values);
  return y;
}

GMatrix project(const Mat& m, TreePtr tree) {
  const int r = tree->vertex_count();
  if (m.rows() != r || m.cols() != r)
    throw DomainError("projection dimension mismatch");
  if (!is_symmetric(m)) throw DomainError("projection input is not symmetric");
  GMatrix x;
  x.dense_ = Mat::Zero(r, r);
  x.blocks_.reserve(tree->clique_count());
  for (int j = 0; j < tree->clique_count(); ++j) {
    const auto& c = tree->clique(j);
    Mat b = submatrix(m, c);
    b = ((b + b.transpose()) / 2.0).eval();  // exact symmetry of blocks
    for (size_t a = 0; a < c.size(); ++a)
      for (size_t d = 0; d < c.size(); ++d) x.dense_(c[a], c[d]) = b(a, d);
    x.blocks_.push_back(std::move(b));
  }
  x.tree_ = std::move(tree);
  return x;
}

SparsePrecision completed_inverse(const GMatrix& x) {
  x.require_in_qg("completed_inverse");
  const auto& t = *x.tree();
  const int r = t.vertex_count();
  Mat y = Mat::Zero(r, r);
  for (int j = 0; j < t.clique_count(); ++j)
    add_block_into(y, t.clique(j), spd_inverse<NotInQG>(x.block(j), "clique"));
  for (int j = 1; j < t.clique_count(); ++j) {
    const auto& s = t.separator(j);
    if (s.empty()) continue;
    Mat inv = spd_inverse<NotInQG>(x.clique_submatrix(s), "separator");
    for (size_t a = 0; a < s.size(); ++a)
      for (size_t b = 0; b < s.size(); ++b) y(s[a], s[b]) -= inv(a, b);
  }
  y = ((y + y.transpose()) / 2.0).eval();
  return SparsePrecision::from_dense(x.tree(), std::move(y), false);
}

Mat complete(const GMatrix& x) {
  const SparsePrecision y = completed_inverse(x);
  Mat xhat = spd_inverse<NotInQG>(y.dense(), "completion inverse");
  xhat = ((xhat + xhat.transpose()) / 2.0).eval();
  // The completion agrees with x on the pattern by definition; writing the
  // stored entries back removes the numeric round trip there.
  const auto& t = *x.tree();
  const int r = t.vertex_count();
  for (int i = 0; i < r; ++i) {
    xhat(i, i) = x.entry(i, i);
    for (int j = i + 1; j < r; ++j)
      if (t.has_edge(i, j)) xhat(i, j) = xhat(j, i) = x.entry(i, j);
  }
  return xhat;
}

GMatrix phi(const SparsePrecision& y) {
  Mat inv = spd_inverse<NotPositiveDefinite>(y.dense(), "phi input");
  inv = ((inv + inv.transpose()) / 2.0).eval();
  return project(inv, y.tree());
}

double edge_inner_product(const GMatrix& x, const SparsePrecision& y) {
  check_same_tree(x.tree(), y.tree());
  const auto& t = *x.tree();
  const int r = t.vertex_count();
  double acc = 0.0;
  for (int i = 0; i < r; ++i) acc += x.entry(i, i) * y.dense()(i, i);
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      if (t.has_edge(i, j)) acc += 2.0 * x.entry(i, j) * y.dense()(i, j);
  return acc;
}

double logdet_completed(const GMatrix& x) {
  x.require_in_qg("logdet_completed");
  const auto& t = *x.tree();
  double acc = 0.0;
  for (int j = 0; j < t.clique_count(); ++j)
    acc += spd_logdet<NotInQG>(x.block(j), "clique");
  for (const auto& d : t.distinct_separators()) {
    if (d.vertices.empty()) continue;
    acc -= d.multiplicity *
           spd_logdet<NotInQG>(x.clique_submatrix(d.vertices), "separator");
  }
  return acc;
}

LayerBlocks layer_blocks(const GMatrix& x, int j) {
  const auto& t = *x.tree();
  const int k = t.clique_count();
  if (j < 0 || j >= k) throw IndexOutOfRange("layer index " + std::to_string(j));
  x.require_in_qg("layer_blocks");

  std::vector<int> sep, res;
  if (j == 0) {
    // First-clique variant: split C_1 against S_2.
    if (k > 1) sep = t.separator(1);
    for (int v : t.clique(0))
      if (std::find(sep.begin(), sep.end(), v) == sep.end()) res.push_back(v);
  } else {
    sep = t.separator(j);
    res = t.residual(j);
  }

  LayerBlocks out;
  out.sep = x.clique_submatrix(sep);
  out.cross = submatrix(x.dense_view(), res, sep);
  Mat res_block = x.clique_submatrix(res);
  if (sep.empty()) {
    out.schur = std::move(res_block);
  } else {
    Mat sep_inv = spd_inverse<NotInQG>(out.sep, "separator block");
    out.schur = res_block - out.cross * sep_inv * out.cross.transpose();
    out.schur = ((out.schur + out.schur.transpose()) / 2.0).eval();
  }
  return out;
}

GMatrix add(const GMatrix& a, const GMatrix& b) {
  check_same_tree(a.tree(), b.tree());
  std::vector<Mat> blocks;
  blocks.reserve(a.blocks().size());
  for (size_t j = 0; j < a.blocks().size(); ++j)
    blocks.push_back(a.block(j) + b.block(j));
  return GMatrix::from_blocks(a.tree(), std::move(blocks));
}

GMatrix scale(const GMatrix& a, double c) {
  std::vector<Mat> blocks;
  blocks.reserve(a.blocks().size());
  for (const Mat& b : a.blocks()) blocks.push_back(c * b);
  return GMatrix::from_blocks(a.tree(), std::move(blocks));
}

GMatrix identity_gmatrix(TreePtr tree, double c) {
  const int r = tree->vertex_count();
  return project(Mat::Identity(r, r) * c, std::move(tree));
}

}  // namespace chordalcov
