#pragma once

#include <vector>

#include "hdmf/data_model.hpp"

namespace hdmf {

/// Minimum-cost perfect assignment on a square cost matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Returns assignment[row] = column.
std::vector<int> solve_assignment(const Matrix& cost);

struct ComponentMatch {
  /// permutation[k] = row of B matched to row k of A.
  std::vector<int> permutation;
  double mean_correlation = 0.0;
};

/// Pearson correlation between every row of A and every row of B (K x K).
Matrix row_correlations(const Matrix& A, const Matrix& B);

/// One-to-one matching of the rows of A and B maximising total Pearson
/// correlation.
ComponentMatch match_components(const Matrix& A, const Matrix& B);

}  // namespace hdmf
