#pragma once

#include <span>
#include <string>
#include <vector>

#include "hdmf/data_model.hpp"
#include "hdmf/pipeline.hpp"
#include "hdmf/synthetic.hpp"

namespace hdmf {

/// Pearson correlation of every column of U (T x K) with every column of
/// X (T x S); zero-variance signals give 0. Returns K x S.
Matrix fc_map(const Matrix& U, const Matrix& X);

/// Element-wise Fisher z transform (see fisher_z in stats.hpp).
Matrix fisher_z_map(const Matrix& r);

/// Fisher-z FC features of one subject for the given 0-based scales, stacked
/// scale-ascending: rows are (scale, component) pairs. Returns F x S.
Matrix fc_features(const FactorStack& stack, const Matrix& X, std::span<const int> scales);

struct Parcellation {
  std::vector<int> parcel;  // per voxel, in [0, parcel_count)
  int parcel_count = 0;
};

/// Voxel -> argmax over rows of the map, lowest index on ties.
Parcellation parcellate(const Matrix& group_mean_V1);

/// Arithmetic mean over subjects of the finest-scale maps.
Matrix group_mean_finest(const DecompositionResult& result);

/// Ordinary least squares per (parcel, event), pooling the parcel's voxels
/// over all training subjects. Coefficients are F + 1 long, intercept last.
struct PredictionModel {
  int feature_count = 0;
  int event_count = 0;
  /// coefficients[p] is (F + 1) x E.
  std::vector<Matrix> coefficients;
  /// Parcels without voxels; they predict the pooled training mean.
  std::vector<int> empty_parcels;

  /// Predicted activation maps, E x S.
  Matrix predict(const Matrix& features, const Parcellation& parcels) const;
};

/// features: per training subject F x S. activations: per training subject
/// E x S (one row per task event).
PredictionModel train_predictors(std::span<const Matrix> features, std::span<const Matrix> activations,
                                 const Parcellation& parcels);

/// Leave-one-subject-out prediction scores for one feature set.
struct EvaluationReport {
  std::vector<std::string> subjects;
  std::vector<std::string> events;
  std::vector<int> scales_used;  // 0-based
  Matrix r;                      // n x E Pearson correlations
  std::vector<std::vector<bool>> degenerate;  // n x E, r forced to 0
  std::vector<int> empty_parcels;

  double mean_r() const;
  Vector per_subject_mean() const;
};

/// activations: per subject E x S. scales_used are 0-based scale indices.
EvaluationReport loso_evaluate(const Cohort& cohort, const DecompositionResult& result,
                               std::span<const Matrix> activations, const std::vector<std::string>& events,
                               std::vector<int> scales_used, unsigned threads = 1);

/// Per-subject mean matched correlation between the result's scale-j maps
/// and the subject-level ground truth maps.
Vector recovery_score(const DecompositionResult& result, const SyntheticGroundTruth& truth, int j);

}  // namespace hdmf
