#pragma once

#include "hdmf/data_model.hpp"

namespace hdmf {

/// Relative singular-value cutoff: sigma_i < max(rows, cols) * eps * sigma_max
/// is treated as zero.
double pinv_cutoff(const Eigen::Index rows, const Eigen::Index cols, double sigma_max);

/// Moore-Penrose pseudo-inverse via SVD.
Matrix pseudo_inverse(const Matrix& m);

/// Minimum-norm least-squares solution X of A X ~ B, i.e. pinv(A) * B.
Matrix min_norm_solve(const Matrix& A, const Matrix& B);

/// Minimum-norm solution U of U V ~ X, i.e. X * pinv(V).
Matrix right_min_norm_solve(const Matrix& X, const Matrix& V);

}  // namespace hdmf
