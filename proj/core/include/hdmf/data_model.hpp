#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hdmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One subject's T x S time-series matrix (rows are time points, columns voxels).
struct SubjectTimeseries {
  std::string subject_id;
  Matrix data;
};

struct Edge {
  std::size_t a = 0;
  std::size_t b = 0;

  bool operator==(const Edge&) const = default;
};

/// Undirected spatial adjacency over S nodes. Edges are stored with a < b,
/// sorted, without duplicates or self-loops.
class NeighborGraph {
 public:
  NeighborGraph() = default;

  /// Throws DataError on self-loops, out-of-range endpoints or duplicate pairs.
  NeighborGraph(std::size_t node_count, std::vector<Edge> edges);

  /// 4-neighbour adjacency on a rows x cols grid, voxel index = r * cols + c.
  static NeighborGraph grid4(std::size_t rows, std::size_t cols);

  std::size_t node_count() const { return node_count_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// 2 |E| / S, the average number of spatial neighbours per node.
  double mean_degree() const;

  bool operator==(const NeighborGraph&) const = default;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
};

struct Cohort {
  std::vector<SubjectTimeseries> subjects;
  NeighborGraph graph;

  std::size_t n() const { return subjects.size(); }
  std::size_t T() const { return subjects.empty() ? 0 : static_cast<std::size_t>(subjects.front().data.rows()); }
  std::size_t S() const { return subjects.empty() ? 0 : static_cast<std::size_t>(subjects.front().data.cols()); }
};

/// Throws DataError naming the offending subject when the cohort is malformed.
void validate_cohort(const Cohort& cohort);

/// Scale count, component counts and optimisation settings of a hierarchy.
/// Scales are 0-based in code (index 0 is the finest scale).
struct HierarchySpec {
  std::vector<int> K;
  double alpha = 1.0;
  double beta = 10.0;
  int max_outer_iters = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;
  int pretrain_iters = 200;
  /// Joint refinement retries a layer update with a halved exponent when the
  /// re-normalised iterate would raise the objective.
  bool backtracking = true;

  int h() const { return static_cast<int>(K.size()); }

  /// Checks the spec on its own and, when T and S are non-zero, against data
  /// dimensions. Throws ConfigError.
  void validate(std::size_t T = 0, std::size_t S = 0) const;
};

/// Per-subject factors. When `nested` is true Vt[0] is K_1 x S and Vt[j] is
/// K_{j+1} x K_j, so scale maps are products of layers. Otherwise every Vt[j]
/// is already a K_j x S voxel-level map (independent / greedy strategies).
struct FactorStack {
  std::string subject_id;
  std::vector<Matrix> Vt;
  std::vector<Matrix> U;
  bool nested = true;

  int h() const { return static_cast<int>(Vt.size()); }

  /// Voxel-level map of scale j: Vt[j] * scale_map(j - 1) when nested.
  Matrix scale_map(int j) const;
};

/// Throws DataError if any layer has negative or non-finite entries, or a row
/// whose max is neither 0 nor within `tol` of 1.
void check_factor_invariants(const FactorStack& stack, double tol = 1e-12);

}  // namespace hdmf
