#include "hdmf/factorization.hpp"

#include <cmath>
#include <random>

#include "hdmf/error.hpp"
#include "hdmf/linalg.hpp"

namespace hdmf {
namespace {

GroupAggregates aggregates_from(std::span<const Matrix* const> per_subject) {
  if (per_subject.empty()) throw DataError("compute_group_aggregates: no subjects");
  const auto K = per_subject.front()->rows();
  const auto S = per_subject.front()->cols();
  Matrix sq = Matrix::Zero(K, S);
  for (const Matrix* m : per_subject) {
    if (m->rows() != K || m->cols() != S) throw DataError("compute_group_aggregates: shape mismatch");
    sq.array() += m->array().square();
  }
  GroupAggregates agg;
  agg.G = sq.array().sqrt();
  agg.gL21 = agg.G.rowwise().sum();
  agg.gL2 = sq.rowwise().sum().array().sqrt();
  return agg;
}

// Group-sparsity gradient halves: numerator V*gL21/gL2^3, denominator
// V/(G*gL2). Zero where the aggregates vanish (V is zero there for everyone).
void add_sparsity_terms(const Matrix& V, const GroupAggregates& agg, double lambda_c, Matrix& num,
                        Matrix& den) {
  if (lambda_c == 0.0) return;
  if (agg.G.rows() != V.rows() || agg.G.cols() != V.cols()) {
    throw DataError("group aggregates do not match the layer shape");
  }
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    const double l2 = agg.gL2[k];
    if (l2 <= 0.0) continue;
    const double num_scale = lambda_c * agg.gL21[k] / (l2 * l2 * l2);
    for (Eigen::Index s = 0; s < V.cols(); ++s) {
      const double g = agg.G(k, s);
      if (g <= 0.0) continue;
      num(k, s) += num_scale * V(k, s);
      den(k, s) += lambda_c * V(k, s) / (g * l2);
    }
  }
}

Matrix multiplicative_step(const Matrix& V, const Matrix& num, Matrix den, double step) {
  const double eps = 1e-12 * (1.0 + num.maxCoeff());
  den.array() += eps;
  if (step == 1.0) return V.array() * (num.array() / den.array()).sqrt();
  return V.array() * (num.array() / den.array()).pow(0.5 * step);
}

}  // namespace

SignSplit split_signs(const Matrix& m) {
  return {m.cwiseMax(0.0), (-m).cwiseMax(0.0)};
}

Matrix fit_timecourses(const Matrix& X, std::span<const Matrix> chain) {
  if (chain.empty()) throw DataError("fit_timecourses: empty factor chain");
  Matrix prod = chain.back();
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
    if (it->cols() != prod.rows()) throw DataError("fit_timecourses: factor chain shapes do not compose");
    prod = (*it) * prod;
  }
  return fit_timecourses(X, prod);
}

Matrix fit_timecourses(const Matrix& X, const Matrix& scale_map) {
  if (scale_map.cols() != X.cols()) throw DataError("fit_timecourses: map columns do not match voxels");
  return right_min_norm_solve(X, scale_map);
}

GroupAggregates compute_group_aggregates(std::span<const Matrix> per_subject) {
  std::vector<const Matrix*> ptrs;
  ptrs.reserve(per_subject.size());
  for (const auto& m : per_subject) ptrs.push_back(&m);
  return aggregates_from(ptrs);
}

GroupAggregates compute_group_aggregates(std::span<const Matrix* const> per_subject) {
  return aggregates_from(per_subject);
}

Matrix update_layer_finest(const Matrix& Vt, const Matrix& U, const Matrix& X,
                           const SubjectGraphOperators* ops, const GroupAggregates& agg,
                           double lambda_c, double lambda_m, double step) {
  const Matrix UtX = U.transpose() * X;
  const Matrix UtU = U.transpose() * U;
  const auto a = split_signs(UtX);
  const auto b = split_signs(UtU);

  Matrix num = a.pos + b.neg * Vt;
  Matrix den = a.neg + b.pos * Vt;
  if (lambda_m != 0.0) {
    if (ops == nullptr) throw DataError("update_layer_finest: graph operators required when lambda_m != 0");
    num += lambda_m * (Vt * ops->W);
    den += lambda_m * (Vt * ops->D.asDiagonal());
  }
  add_sparsity_terms(Vt, agg, lambda_c, num, den);
  return multiplicative_step(Vt, num, std::move(den), step);
}

Matrix update_layer_deep(const Matrix& Vt, const Matrix& U, const Matrix& X, const Matrix& Vbar,
                         const GroupAggregates& agg, double lambda_c, double step) {
  const Matrix UtX = U.transpose() * X;
  const Matrix UtU = U.transpose() * U;
  const Matrix VbarT = Vbar.transpose();
  const Matrix gram = Vbar * VbarT;
  const auto a = split_signs(UtX);
  const auto b = split_signs(UtU);
  const Matrix Vg = Vt * gram;

  Matrix num = a.pos * VbarT + b.neg * Vg;
  Matrix den = a.neg * VbarT + b.pos * Vg;
  add_sparsity_terms(Vt, agg, lambda_c, num, den);
  return multiplicative_step(Vt, num, std::move(den), step);
}

Vector normalize_rows_inf(Matrix& V) {
  Vector scales = Vector::Ones(V.rows());
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    const double m = V.row(k).maxCoeff();
    if (m > 0.0 && m != 1.0) {
      V.row(k) /= m;
      scales[k] = m;
    }
  }
  return scales;
}

RowNormalized normalized_rows_inf(const Matrix& V) {
  RowNormalized out{V, {}};
  out.scales = normalize_rows_inf(out.V);
  return out;
}

ObjectiveBreakdown objective(const Cohort& cohort, std::span<const FactorStack> stacks,
                             const RegularizationWeights& weights,
                             std::span<const SubjectGraphOperators> ops, const HierarchySpec& spec) {
  if (stacks.size() != cohort.n()) throw DataError("objective: one factor stack per subject expected");
  ObjectiveBreakdown out;
  const int h = spec.h();
  for (std::size_t i = 0; i < stacks.size(); ++i) {
    const auto& st = stacks[i];
    const Matrix recon = st.U.at(static_cast<std::size_t>(h - 1)) * st.scale_map(h - 1);
    out.fit += (cohort.subjects[i].data - recon).squaredNorm();
  }
  for (int j = 0; j < h; ++j) {
    const double lambda = weights.lambda_c.at(static_cast<std::size_t>(j));
    if (lambda == 0.0) continue;
    std::vector<Matrix> layer;
    layer.reserve(stacks.size());
    for (const auto& st : stacks) layer.push_back(st.Vt[static_cast<std::size_t>(j)]);
    out.sparsity += lambda * group_sparsity_value(layer);
  }
  if (weights.lambda_m != 0.0) {
    if (ops.size() != stacks.size()) throw DataError("objective: graph operators required when lambda_m != 0");
    double g = 0.0;
    for (std::size_t i = 0; i < stacks.size(); ++i) g += graph_reg_value(stacks[i].Vt.front(), ops[i]);
    out.graph = weights.lambda_m * g;
  }
  out.total = out.fit + out.sparsity + out.graph;
  return out;
}

Matrix random_init(Eigen::Index K, Eigen::Index S, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix V(K, S);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index s = 0; s < S; ++s) V(k, s) = unif(rng);
  }
  normalize_rows_inf(V);
  return V;
}

SemiNmfResult sparse_semi_nmf(const Matrix& Y, int K, double lambda_sparsity, std::uint64_t seed,
                              int iters, double rel_tol) {
  if (K < 1 || K > std::min(Y.rows(), Y.cols())) {
    throw ConfigError("sparse_semi_nmf: K = " + std::to_string(K) + " must lie in [1, min(rows, cols)]");
  }
  SemiNmfResult res;
  res.V = random_init(K, Y.cols(), seed);
  res.U = fit_timecourses(Y, res.V);

  auto eval = [&](const Matrix& U, const Matrix& V) {
    double obj = (Y - U * V).squaredNorm();
    if (lambda_sparsity != 0.0) obj += lambda_sparsity * group_sparsity_value(std::span<const Matrix>(&V, 1));
    return obj;
  };
  double prev = eval(res.U, res.V);
  res.objective = prev;
  for (int it = 1; it <= iters; ++it) {
    const auto agg = compute_group_aggregates(std::span<const Matrix>(&res.V, 1));
    res.V = update_layer_finest(res.V, res.U, Y, nullptr, agg, lambda_sparsity, 0.0);
    normalize_rows_inf(res.V);
    res.U = fit_timecourses(Y, res.V);
    const double cur = eval(res.U, res.V);
    res.iterations = it;
    res.objective = cur;
    if (std::abs(prev - cur) <= rel_tol * std::max(std::abs(prev), 1e-300)) break;
    prev = cur;
  }
  return res;
}

}  // namespace hdmf
