#include "hdmf/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdmf/error.hpp"

namespace hdmf {

NeighborGraph::NeighborGraph(std::size_t node_count, std::vector<Edge> edges)
    : node_count_(node_count) {
  for (auto& e : edges) {
    if (e.a == e.b) {
      throw DataError("neighbor graph: self-loop at node " + std::to_string(e.a));
    }
    if (e.a >= node_count || e.b >= node_count) {
      std::ostringstream msg;
      msg << "neighbor graph: edge (" << e.a << ", " << e.b << ") out of range for " << node_count
          << " nodes";
      throw DataError(msg.str());
    }
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) {
    std::ostringstream msg;
    msg << "neighbor graph: duplicate edge (" << dup->a << ", " << dup->b << ")";
    throw DataError(msg.str());
  }
  edges_ = std::move(edges);
}

NeighborGraph NeighborGraph::grid4(std::size_t rows, std::size_t cols) {
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + cols});
    }
  }
  return NeighborGraph(rows * cols, std::move(edges));
}

double NeighborGraph::mean_degree() const {
  if (node_count_ == 0) return 0.0;
  return 2.0 * static_cast<double>(edges_.size()) / static_cast<double>(node_count_);
}

void validate_cohort(const Cohort& cohort) {
  if (cohort.subjects.empty()) throw DataError("cohort: no subjects");
  const auto T = cohort.subjects.front().data.rows();
  const auto S = cohort.subjects.front().data.cols();
  if (T < 2) throw DataError("cohort: need at least 2 time points, got " + std::to_string(T));
  if (S < 1) throw DataError("cohort: need at least 1 voxel");
  for (std::size_t i = 0; i < cohort.subjects.size(); ++i) {
    const auto& s = cohort.subjects[i];
    if (s.data.rows() != T || s.data.cols() != S) {
      std::ostringstream msg;
      msg << "cohort: dimension mismatch: subject " << i << " ('" << s.subject_id << "') is "
          << s.data.rows() << "x" << s.data.cols() << ", expected " << T << "x" << S;
      throw DataError(msg.str());
    }
    if (!s.data.allFinite()) {
      std::ostringstream msg;
      msg << "cohort: non-finite entry in subject " << i << " ('" << s.subject_id << "')";
      throw DataError(msg.str());
    }
  }
  if (cohort.graph.node_count() != static_cast<std::size_t>(S)) {
    std::ostringstream msg;
    msg << "cohort: graph has " << cohort.graph.node_count() << " nodes but subjects have " << S
        << " voxels";
    throw DataError(msg.str());
  }
}

void HierarchySpec::validate(std::size_t T, std::size_t S) const {
  if (K.empty()) throw ConfigError("hierarchy: at least one scale is required");
  for (std::size_t j = 0; j < K.size(); ++j) {
    if (K[j] < 1) throw ConfigError("hierarchy: K values must be positive");
    if (j > 0 && K[j] >= K[j - 1]) {
      throw ConfigError("hierarchy: K must be strictly decreasing from fine to coarse");
    }
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("hierarchy: alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("hierarchy: beta must be >= 0");
  if (max_outer_iters < 1) throw ConfigError("hierarchy: max_outer_iters must be >= 1");
  if (pretrain_iters < 1) throw ConfigError("hierarchy: pretrain_iters must be >= 1");
  if (!(rel_tol >= 0.0)) throw ConfigError("hierarchy: rel_tol must be >= 0");
  if (T > 0 && S > 0) {
    const auto bound = std::min(T, S);
    if (static_cast<std::size_t>(K.front()) > bound) {
      throw ConfigError("hierarchy: K_1 = " + std::to_string(K.front()) +
                        " exceeds min(T, S) = " + std::to_string(bound));
    }
  }
}

Matrix FactorStack::scale_map(int j) const {
  if (!nested || j == 0) return Vt.at(static_cast<std::size_t>(j));
  return Vt.at(static_cast<std::size_t>(j)) * scale_map(j - 1);
}

void check_factor_invariants(const FactorStack& stack, double tol) {
  for (int j = 0; j < stack.h(); ++j) {
    const Matrix& v = stack.Vt[static_cast<std::size_t>(j)];
    const std::string where = "subject '" + stack.subject_id + "' scale " + std::to_string(j + 1);
    if (!v.allFinite()) throw DataError(where + ": non-finite factor entry");
    if ((v.array() < 0.0).any()) throw DataError(where + ": negative factor entry");
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      const double m = v.row(k).maxCoeff();
      if (m != 0.0 && std::abs(m - 1.0) > tol) {
        throw DataError(where + ": row " + std::to_string(k) + " has max " + std::to_string(m));
      }
    }
  }
}

}  // namespace hdmf
