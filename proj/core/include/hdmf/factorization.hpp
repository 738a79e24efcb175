#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdmf/data_model.hpp"
#include "hdmf/regularizers.hpp"

namespace hdmf {

struct SignSplit {
  Matrix pos;  // (|m| + m) / 2
  Matrix neg;  // (|m| - m) / 2
};

SignSplit split_signs(const Matrix& m);

/// U_j = X * pinv(Vt_j * ... * Vt_1). `chain` is ordered coarse to fine,
/// i.e. {Vt_j, Vt_{j-1}, ..., Vt_1}.
Matrix fit_timecourses(const Matrix& X, std::span<const Matrix> chain);
Matrix fit_timecourses(const Matrix& X, const Matrix& scale_map);

/// Cross-subject aggregates of one scale:
///   G[k,s]  = sqrt(sum_i V_i[k,s]^2)
///   gL21[k] = sum_s G[k,s]
///   gL2[k]  = sqrt(sum_s G[k,s]^2)
/// Summation runs over subjects in ascending order.
struct GroupAggregates {
  Matrix G;
  Vector gL21;
  Vector gL2;
};

GroupAggregates compute_group_aggregates(std::span<const Matrix> per_subject);
GroupAggregates compute_group_aggregates(std::span<const Matrix* const> per_subject);

/// Multiplicative update of the finest layer (K_1 x S). `ops` may be null
/// when lambda_m is zero. The element-wise factor is (num / den)^(step / 2);
/// step = 1 is the plain square-root update.
Matrix update_layer_finest(const Matrix& Vt, const Matrix& U, const Matrix& X,
                           const SubjectGraphOperators* ops, const GroupAggregates& agg,
                           double lambda_c, double lambda_m, double step = 1.0);

/// Multiplicative update of a coarser layer Vt_j (K_j x K_{j-1}); `Vbar` is
/// the product of the finer layers Vt_{j-1} ... Vt_1 (K_{j-1} x S).
Matrix update_layer_deep(const Matrix& Vt, const Matrix& U, const Matrix& X, const Matrix& Vbar,
                         const GroupAggregates& agg, double lambda_c, double step = 1.0);

/// Divides every non-zero row by its maximum. Returns the per-row divisors
/// (1 for zero rows).
Vector normalize_rows_inf(Matrix& V);

struct RowNormalized {
  Matrix V;
  Vector scales;
};
RowNormalized normalized_rows_inf(const Matrix& V);

struct ObjectiveBreakdown {
  double fit = 0.0;
  double sparsity = 0.0;
  double graph = 0.0;
  double total = 0.0;
};

/// Joint objective: sum_i |X_i - U_h V_h|_F^2 + sum_j lambda_c[j] R_c[j]
/// + lambda_m sum_i Tr(V_1 L_i V_1^T). Uses the stacks' stored U_h.
/// `ops` may be empty when lambda_m is zero.
ObjectiveBreakdown objective(const Cohort& cohort, std::span<const FactorStack> stacks,
                             const RegularizationWeights& weights,
                             std::span<const SubjectGraphOperators> ops, const HierarchySpec& spec);

struct SemiNmfResult {
  Matrix U;
  Matrix V;
  int iterations = 0;
  double objective = 0.0;
};

/// Single-subject group-sparse semi-NMF Y ~ U V with V >= 0 and rows of V
/// max-normalised. Uniform [0,1] seeded initialisation.
SemiNmfResult sparse_semi_nmf(const Matrix& Y, int K, double lambda_sparsity, std::uint64_t seed,
                              int iters, double rel_tol = 1e-6);

/// Uniform [0,1] K x S matrix from a 64-bit Mersenne twister, rows normalised.
Matrix random_init(Eigen::Index K, Eigen::Index S, std::uint64_t seed);

}  // namespace hdmf
