#pragma once

#include <cstdint>
#include <vector>

#include "hdmf/data_model.hpp"
#include "hdmf/io.hpp"

namespace hdmf {

/// Known hierarchy behind a synthetic cohort.
struct SyntheticGroundTruth {
  /// Group-level layers: [0] is K_1 x S (grid blobs), [j] is K_{j+1} x K_j.
  std::vector<Matrix> group_layers;
  /// Per-subject perturbed finest layer (K_1 x S).
  std::vector<Matrix> subject_finest;
  /// Per-subject coarsest-scale time courses (T x K_h).
  std::vector<Matrix> subject_timecourses;
  double noise_sigma = 0.0;
  double subject_jitter = 0.0;
  GridShape grid;

  /// Subject-level stack: perturbed finest layer plus shared merge layers.
  FactorStack subject_stack(std::size_t i) const;
  /// Voxel-level map of scale j for subject i.
  Matrix subject_scale_map(std::size_t i, int j) const;
};

struct SyntheticCohort {
  Cohort cohort;
  SyntheticGroundTruth truth;
};

struct SyntheticOptions {
  std::size_t n = 2;
  std::size_t T = 100;
  GridShape grid{6, 6};
  double noise_sigma = 0.0;
  double subject_jitter = 0.0;
  std::uint64_t seed = 0;
};

/// Builds K_1 compact blobs on the grid, merges them through sparse
/// non-negative layers, draws smooth per-subject coarsest-scale time courses
/// and emits X_i = U_h Vt_h ... Vt_1^i + noise, with the signal scaled to unit
/// RMS and noise standard deviation noise_sigma * signal RMS. The neighbour
/// graph is the 4-neighbour grid. Throws ConfigError when the blobs do not
/// fit on the grid.
SyntheticCohort generate_synthetic_cohort(const HierarchySpec& spec, const SyntheticOptions& opts);

/// Writes group layers, per-subject finest layers and time courses plus
/// truth.meta into `dir`.
void write_ground_truth(const SyntheticGroundTruth& truth, const std::vector<std::string>& subject_ids,
                        const fs::path& dir);

}  // namespace hdmf
