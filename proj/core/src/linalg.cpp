#include "hdmf/linalg.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

namespace hdmf {
namespace {

// Thin SVD with the cutoff applied: returns (U, inverted singular values, V).
struct TruncatedSvd {
  Matrix u;
  Vector inv_sigma;
  Matrix v;
};

TruncatedSvd truncated_svd(const Matrix& m) {
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  TruncatedSvd out{svd.matrixU(), Vector::Zero(sigma.size()), svd.matrixV()};
  if (sigma.size() == 0) return out;
  const double cutoff = pinv_cutoff(m.rows(), m.cols(), sigma[0]);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma[i] > 0.0 && sigma[i] >= cutoff) out.inv_sigma[i] = 1.0 / sigma[i];
  }
  return out;
}

}  // namespace

double pinv_cutoff(const Eigen::Index rows, const Eigen::Index cols, double sigma_max) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * sigma_max;
}

Matrix pseudo_inverse(const Matrix& m) {
  const auto svd = truncated_svd(m);
  return svd.v * svd.inv_sigma.asDiagonal() * svd.u.transpose();
}

Matrix min_norm_solve(const Matrix& A, const Matrix& B) {
  const auto svd = truncated_svd(A);
  return svd.v * (svd.inv_sigma.asDiagonal() * (svd.u.transpose() * B));
}

Matrix right_min_norm_solve(const Matrix& X, const Matrix& V) {
  // V = Uv S Wv^T  =>  pinv(V) = Wv S^+ Uv^T
  const auto svd = truncated_svd(V);
  return ((X * svd.v) * svd.inv_sigma.asDiagonal()) * svd.u.transpose();
}

}  // namespace hdmf
