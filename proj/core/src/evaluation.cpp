#include "hdmf/evaluation.hpp"

#include <algorithm>
#include <set>

#include "hdmf/assignment.hpp"
#include "hdmf/error.hpp"
#include "hdmf/linalg.hpp"
#include "hdmf/parallel.hpp"
#include "hdmf/regularizers.hpp"
#include "hdmf/stats.hpp"

namespace hdmf {
namespace {

// Columns centred and scaled to unit norm; constant columns become zero.
Matrix standardized_columns(const Matrix& m) {
  Matrix z = m.rowwise() - m.colwise().mean();
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const double norm = z.col(c).norm();
    if (norm > 0.0) {
      z.col(c) /= norm;
    } else {
      z.col(c).setZero();
    }
  }
  return z;
}

bool is_constant(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 || (v.array() == v[0]).all();
}

}  // namespace

Matrix fc_map(const Matrix& U, const Matrix& X) {
  if (U.rows() != X.rows()) throw DataError("fc_map: time courses and data differ in length");
  Matrix r = standardized_columns(U).transpose() * standardized_columns(X);
  return r.cwiseMax(-1.0).cwiseMin(1.0);
}

Matrix fisher_z_map(const Matrix& r) {
  return r.unaryExpr([](double v) { return fisher_z(v); });
}

Matrix fc_features(const FactorStack& stack, const Matrix& X, std::span<const int> scales) {
  Eigen::Index F = 0;
  for (int j : scales) F += stack.U.at(static_cast<std::size_t>(j)).cols();
  Matrix out(F, X.cols());
  Eigen::Index row = 0;
  for (int j : scales) {
    const Matrix& U = stack.U[static_cast<std::size_t>(j)];
    out.middleRows(row, U.cols()) = fisher_z_map(fc_map(U, X));
    row += U.cols();
  }
  return out;
}

Parcellation parcellate(const Matrix& group_mean_V1) {
  if (group_mean_V1.rows() < 1) throw DataError("parcellate: need at least one component");
  Parcellation p;
  p.parcel_count = static_cast<int>(group_mean_V1.rows());
  p.parcel.resize(static_cast<std::size_t>(group_mean_V1.cols()));
  for (Eigen::Index s = 0; s < group_mean_V1.cols(); ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < group_mean_V1.rows(); ++k) {
      if (group_mean_V1(k, s) > group_mean_V1(best, s)) best = k;
    }
    p.parcel[static_cast<std::size_t>(s)] = static_cast<int>(best);
  }
  return p;
}

Matrix group_mean_finest(const DecompositionResult& result) {
  if (result.stacks.empty()) throw DataError("group_mean_finest: empty result");
  Matrix sum = result.stacks.front().scale_map(0);
  for (std::size_t i = 1; i < result.stacks.size(); ++i) sum += result.stacks[i].scale_map(0);
  return sum / static_cast<double>(result.stacks.size());
}

Matrix PredictionModel::predict(const Matrix& features, const Parcellation& parcels) const {
  if (features.rows() != feature_count) throw DataError("predict: feature count does not match the model");
  Matrix out(event_count, features.cols());
  for (Eigen::Index s = 0; s < features.cols(); ++s) {
    const Matrix& coef = coefficients.at(static_cast<std::size_t>(parcels.parcel[static_cast<std::size_t>(s)]));
    out.col(s) = coef.topRows(feature_count).transpose() * features.col(s) + coef.row(feature_count).transpose();
  }
  return out;
}

PredictionModel train_predictors(std::span<const Matrix> features, std::span<const Matrix> activations,
                                 const Parcellation& parcels) {
  if (features.empty()) throw DataError("train_predictors: need at least one training subject");
  if (features.size() != activations.size()) throw DataError("train_predictors: features/activations count differ");
  const Eigen::Index F = features.front().rows();
  const Eigen::Index S = features.front().cols();
  const Eigen::Index E = activations.front().rows();
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].rows() != F || features[i].cols() != S || activations[i].rows() != E ||
        activations[i].cols() != S) {
      throw DataError("train_predictors: inconsistent feature or activation shapes");
    }
  }
  if (static_cast<Eigen::Index>(parcels.parcel.size()) != S) throw DataError("train_predictors: parcellation size");

  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(parcels.parcel_count));
  for (Eigen::Index s = 0; s < S; ++s) members[static_cast<std::size_t>(parcels.parcel[static_cast<std::size_t>(s)])].push_back(s);

  PredictionModel model;
  model.feature_count = static_cast<int>(F);
  model.event_count = static_cast<int>(E);
  model.coefficients.resize(members.size());

  Vector pool_mean = Vector::Zero(E);
  for (const auto& a : activations) pool_mean += a.rowwise().sum();
  pool_mean /= static_cast<double>(S * static_cast<Eigen::Index>(activations.size()));

  const auto n = static_cast<Eigen::Index>(features.size());
  for (std::size_t p = 0; p < members.size(); ++p) {
    const auto& vox = members[p];
    Matrix& coef = model.coefficients[p];
    if (vox.empty()) {
      model.empty_parcels.push_back(static_cast<int>(p));
      coef = Matrix::Zero(F + 1, E);
      coef.row(F) = pool_mean.transpose();
      continue;
    }
    const auto m = static_cast<Eigen::Index>(vox.size());
    Matrix A(n * m, F + 1);
    Matrix B(n * m, E);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index v = 0; v < m; ++v) {
        const Eigen::Index row = i * m + v;
        A.row(row).head(F) = features[static_cast<std::size_t>(i)].col(vox[static_cast<std::size_t>(v)]).transpose();
        A(row, F) = 1.0;
        B.row(row) = activations[static_cast<std::size_t>(i)].col(vox[static_cast<std::size_t>(v)]).transpose();
      }
    }
    coef = min_norm_solve(A, B);
  }
  return model;
}

double EvaluationReport::mean_r() const { return r.size() ? r.mean() : 0.0; }

Vector EvaluationReport::per_subject_mean() const { return r.rowwise().mean(); }

EvaluationReport loso_evaluate(const Cohort& cohort, const DecompositionResult& result,
                               std::span<const Matrix> activations, const std::vector<std::string>& events,
                               std::vector<int> scales_used, unsigned threads) {
  const std::size_t n = cohort.n();
  if (n < 2) throw DataError("loso_evaluate: need at least 2 subjects");
  if (result.stacks.size() != n || activations.size() != n) {
    throw DataError("loso_evaluate: cohort, decomposition and activations disagree on subject count");
  }
  std::sort(scales_used.begin(), scales_used.end());
  scales_used.erase(std::unique(scales_used.begin(), scales_used.end()), scales_used.end());
  for (int j : scales_used) {
    if (j < 0 || j >= result.spec.h()) throw ConfigError("loso_evaluate: scale " + std::to_string(j + 1) + " not in result");
  }
  if (scales_used.empty()) throw ConfigError("loso_evaluate: no scales selected");
  const auto E = static_cast<Eigen::Index>(events.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (activations[i].rows() != E || activations[i].cols() != static_cast<Eigen::Index>(cohort.S())) {
      throw DataError("loso_evaluate: activation maps of subject '" + cohort.subjects[i].subject_id +
                      "' are not " + std::to_string(E) + " x S");
    }
  }

  const Parcellation parcels = parcellate(group_mean_finest(result));
  std::vector<Matrix> features(n);
  parallel_for(n, threads, [&](std::size_t i) {
    features[i] = fc_features(result.stacks[i], cohort.subjects[i].data, scales_used);
  });

  EvaluationReport rep;
  rep.scales_used = scales_used;
  rep.events = events;
  for (const auto& s : cohort.subjects) rep.subjects.push_back(s.subject_id);
  rep.r = Matrix::Zero(static_cast<Eigen::Index>(n), E);
  rep.degenerate.assign(n, std::vector<bool>(static_cast<std::size_t>(E), false));
  std::vector<std::vector<int>> empty(n);

  parallel_for(n, threads, [&](std::size_t held_out) {
    std::vector<Matrix> train_f, train_a;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == held_out) continue;
      train_f.push_back(features[i]);
      train_a.push_back(activations[i]);
    }
    const auto model = train_predictors(train_f, train_a, parcels);
    empty[held_out] = model.empty_parcels;
    const Matrix pred = model.predict(features[held_out], parcels);
    for (Eigen::Index e = 0; e < E; ++e) {
      const Vector p = pred.row(e).transpose();
      const Vector t = activations[held_out].row(e).transpose();
      if (is_constant(p) || is_constant(t)) {
        rep.degenerate[held_out][static_cast<std::size_t>(e)] = true;
      } else {
        rep.r(static_cast<Eigen::Index>(held_out), e) = pearson(p, t);
      }
    }
  });
  std::set<int> all_empty;
  for (const auto& e : empty) all_empty.insert(e.begin(), e.end());
  rep.empty_parcels.assign(all_empty.begin(), all_empty.end());
  return rep;
}

Vector recovery_score(const DecompositionResult& result, const SyntheticGroundTruth& truth, int j) {
  Vector out(static_cast<Eigen::Index>(result.stacks.size()));
  for (std::size_t i = 0; i < result.stacks.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] =
        match_components(result.stacks[i].scale_map(j), truth.subject_scale_map(i, j)).mean_correlation;
  }
  return out;
}

}  // namespace hdmf
