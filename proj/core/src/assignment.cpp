#include "hdmf/assignment.hpp"

#include <limits>

#include "hdmf/error.hpp"
#include "hdmf/regularizers.hpp"

namespace hdmf {

std::vector<int> solve_assignment(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw DataError("solve_assignment: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  if (n == 0) return {};
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is a virtual start column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assignment[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return assignment;
}

Matrix row_correlations(const Matrix& A, const Matrix& B) {
  if (A.cols() != B.cols()) throw DataError("row_correlations: column counts differ");
  Matrix C(A.rows(), B.rows());
  for (Eigen::Index a = 0; a < A.rows(); ++a) {
    const Vector ra = A.row(a).transpose();
    for (Eigen::Index b = 0; b < B.rows(); ++b) C(a, b) = pearson(ra, B.row(b).transpose());
  }
  return C;
}

ComponentMatch match_components(const Matrix& A, const Matrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) throw DataError("match_components: shapes differ");
  const Matrix corr = row_correlations(A, B);
  ComponentMatch out;
  out.permutation = solve_assignment(-corr);
  double total = 0.0;
  for (std::size_t k = 0; k < out.permutation.size(); ++k) {
    total += corr(static_cast<Eigen::Index>(k), out.permutation[k]);
  }
  out.mean_correlation = A.rows() > 0 ? total / static_cast<double>(A.rows()) : 0.0;
  return out;
}

}  // namespace hdmf
