#pragma once

#include <Eigen/Dense>
#include <vector>

#include "chordalcov/errors.hpp"

namespace chordalcov {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Extracts the square submatrix m[idx, idx].
Mat submatrix(const Mat& m, const std::vector<int>& idx);

// Extracts the rectangular submatrix m[rows, cols].
Mat submatrix(const Mat& m, const std::vector<int>& rows,
              const std::vector<int>& cols);

// target[idx, idx] += block, i.e. accumulates (block)^0 in the paper-free
// sense of padding with zeros outside idx x idx.
void add_block_into(Mat& target, const std::vector<int>& idx, const Mat& block);

// Writes block into target[rows, cols] (and does NOT touch the transpose).
void set_block(Mat& target, const std::vector<int>& rows,
               const std::vector<int>& cols, const Mat& block);

bool is_spd(const Mat& m);

// Inverse of a symmetric positive definite matrix via Cholesky.
// Throws the exception type E when the factorization fails.
template <class E = NotPositiveDefinite>
Mat spd_inverse(const Mat& m, const char* context = "matrix") {
  if (m.rows() == 0) return Mat(0, 0);
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw E(std::string(context) + " is not positive definite");
  return llt.solve(Mat::Identity(m.rows(), m.cols()));
}

// log det of an SPD matrix in log space (sum of log Cholesky diagonals).
template <class E = NotPositiveDefinite>
double spd_logdet(const Mat& m, const char* context = "matrix") {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    throw E(std::string(context) + " is not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double max_abs(const Mat& m);

// Symmetry check to working precision (relative to the largest entry).
bool is_symmetric(const Mat& m, double tol = 1e-9);

}  // namespace chordalcov
