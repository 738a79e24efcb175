#include "hdmf/regularizers.hpp"

#include <cmath>

#include "hdmf/error.hpp"

namespace hdmf {

double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  const auto n = static_cast<double>(x.size());
  const Vector xc = x.array() - x.sum() / n;
  const Vector yc = y.array() - y.sum() / n;
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  const double r = xc.dot(yc) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

SubjectGraphOperators build_affinity(const SubjectTimeseries& x, const NeighborGraph& g) {
  const auto S = static_cast<Eigen::Index>(g.node_count());
  if (x.data.cols() != S) {
    throw DataError("build_affinity: subject '" + x.subject_id + "' has " + std::to_string(x.data.cols()) +
                    " voxels, graph has " + std::to_string(S) + " nodes");
  }
  const auto T = static_cast<double>(x.data.rows());

  // Centre and scale each column once so every edge costs one dot product.
  Matrix z = x.data.rowwise() - x.data.colwise().sum() / T;
  Vector norms = z.colwise().norm();
  for (Eigen::Index s = 0; s < S; ++s) {
    if (norms[s] > 0.0) z.col(s) /= norms[s];
  }

  SubjectGraphOperators ops;
  ops.edges = g.edges();
  ops.edge_weight.reserve(g.edges().size());
  ops.D = Vector::Zero(S);
  std::vector<Eigen::Triplet<double>> w_trip;
  std::vector<Eigen::Triplet<double>> l_trip;
  w_trip.reserve(2 * g.edges().size());
  l_trip.reserve(2 * g.edges().size() + static_cast<std::size_t>(S));
  for (const auto& e : g.edges()) {
    const auto a = static_cast<Eigen::Index>(e.a);
    const auto b = static_cast<Eigen::Index>(e.b);
    double rho = 0.0;
    if (norms[a] > 0.0 && norms[b] > 0.0) rho = std::clamp(z.col(a).dot(z.col(b)), -1.0, 1.0);
    const double w = 0.5 * (1.0 + rho);
    ops.edge_weight.push_back(w);
    w_trip.emplace_back(a, b, w);
    w_trip.emplace_back(b, a, w);
    l_trip.emplace_back(a, b, -w);
    l_trip.emplace_back(b, a, -w);
    ops.D[a] += w;
    ops.D[b] += w;
  }
  for (Eigen::Index s = 0; s < S; ++s) l_trip.emplace_back(s, s, ops.D[s]);
  ops.W.resize(S, S);
  ops.W.setFromTriplets(w_trip.begin(), w_trip.end());
  ops.L.resize(S, S);
  ops.L.setFromTriplets(l_trip.begin(), l_trip.end());
  return ops;
}

double graph_reg_value(const Matrix& V1, const SubjectGraphOperators& ops) {
  if (V1.cols() != ops.W.cols()) throw DataError("graph_reg_value: V1 columns do not match graph size");
  double total = 0.0;
  for (std::size_t e = 0; e < ops.edges.size(); ++e) {
    const auto a = static_cast<Eigen::Index>(ops.edges[e].a);
    const auto b = static_cast<Eigen::Index>(ops.edges[e].b);
    total += ops.edge_weight[e] * (V1.col(a) - V1.col(b)).squaredNorm();
  }
  return total;
}

double group_sparsity_value(std::span<const Matrix> per_subject) {
  if (per_subject.empty()) return 0.0;
  const auto K = per_subject.front().rows();
  const auto S = per_subject.front().cols();
  for (const auto& m : per_subject) {
    if (m.rows() != K || m.cols() != S) throw DataError("group_sparsity_value: shape mismatch across subjects");
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    double l21 = 0.0;
    double sq = 0.0;
    for (Eigen::Index s = 0; s < S; ++s) {
      double g2 = 0.0;
      for (const auto& m : per_subject) g2 += m(k, s) * m(k, s);
      l21 += std::sqrt(g2);
      sq += g2;
    }
    if (sq > 0.0) total += l21 / std::sqrt(sq);
  }
  return total;
}

RegularizationWeights regularization_weights(const HierarchySpec& spec, std::size_t n, std::size_t T,
                                             const NeighborGraph& g) {
  spec.validate();
  if (n == 0) throw ConfigError("regularization_weights: need at least one subject");
  RegularizationWeights w;
  const double nT = static_cast<double>(n) * static_cast<double>(T);
  for (int k : spec.K) w.lambda_c.push_back(spec.alpha * nT / static_cast<double>(k));
  const double n_m = g.mean_degree();
  if (spec.beta > 0.0) {
    if (n_m == 0.0) throw ConfigError("regularization_weights: beta > 0 requires a graph with edges");
    w.lambda_m = spec.beta * static_cast<double>(T) / (static_cast<double>(spec.K.front()) * n_m);
  }
  return w;
}

}  // namespace hdmf
