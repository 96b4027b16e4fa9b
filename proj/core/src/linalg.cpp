#include "chordalcov/linalg.hpp"

namespace chordalcov {

Mat submatrix(const Mat& m, const std::vector<int>& idx) {
  return submatrix(m, idx, idx);
}

Mat submatrix(const Mat& m, const std::vector<int>& rows,
              const std::vector<int>& cols) {
  Mat out(rows.size(), cols.size());
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b) out(a, b) = m(rows[a], cols[b]);
  return out;
}

void add_block_into(Mat& target, const std::vector<int>& idx,
                    const Mat& block) {
  for (size_t a = 0; a < idx.size(); ++a)
    for (size_t b = 0; b < idx.size(); ++b)
      target(idx[a], idx[b]) += block(a, b);
}

void set_block(Mat& target, const std::vector<int>& rows,
               const std::vector<int>& cols, const Mat& block) {
  for (size_t a = 0; a < rows.size(); ++a)
    for (size_t b = 0; b < cols.size(); ++b)
      target(rows[a], cols[b]) = block(a, b);
}

bool is_spd(const Mat& m) {
  if (m.rows() == 0) return true;
  Eigen::LLT<Mat> llt(m);
  return llt.info() == Eigen::Success;
}

double max_abs(const Mat& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

bool is_symmetric(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.transpose()) <= tol * scale;
}

}  // namespace chordalcov
