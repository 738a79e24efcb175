#pragma once

#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "hdmf/data_model.hpp"

namespace hdmf {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Affinity W, degree D and Laplacian L = D - W for one subject. W is
/// symmetric, non-zero only on neighbour-graph edges.
struct SubjectGraphOperators {
  SparseMatrix W;
  Vector D;
  SparseMatrix L;
  /// Per-edge affinity, aligned with NeighborGraph::edges().
  std::vector<double> edge_weight;
  std::vector<Edge> edges;
};

/// Pearson correlation of two equally long signals; 0 if either is constant.
double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

/// W[a,b] = (1 + corr(x[:,a], x[:,b])) / 2 on every edge (a,b).
SubjectGraphOperators build_affinity(const SubjectTimeseries& x, const NeighborGraph& g);

/// Tr(V1 L V1^T), evaluated edge-wise as sum_edges W_ab |V1[:,a] - V1[:,b]|^2.
double graph_reg_value(const Matrix& V1, const SubjectGraphOperators& ops);

/// L2,1-over-L2 group sparsity of one scale across subjects:
///   sum_k  sum_s sqrt(sum_i V_i[k,s]^2) / sqrt(sum_s sum_i V_i[k,s]^2)
/// Rows that are zero for every subject contribute 0.
double group_sparsity_value(std::span<const Matrix> per_subject);

struct RegularizationWeights {
  std::vector<double> lambda_c;  // one per scale
  double lambda_m = 0.0;
};

/// lambda_c[j] = alpha n T / K_j and lambda_m = beta T / (K_1 n_M), with n_M
/// the mean degree of g. Throws ConfigError for an edgeless graph with beta > 0.
RegularizationWeights regularization_weights(const HierarchySpec& spec, std::size_t n, std::size_t T,
                                             const NeighborGraph& g);

}  // namespace hdmf
