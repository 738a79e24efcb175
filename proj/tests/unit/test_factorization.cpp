#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hdmf/error.hpp"
#include "hdmf/factorization.hpp"
#include "hdmf/linalg.hpp"
#include "oracles.hpp"

using namespace hdmf;

namespace {

GroupAggregates own_aggregates(const Matrix& V) { return compute_group_aggregates(std::span<const Matrix>(&V, 1)); }

}  // namespace

TEST(SplitSigns, ReconstructsExactly) {
  Matrix m(1, 3);
  m << 3, -3, 0;
  auto s = split_signs(m);
  EXPECT_EQ(s.pos(0, 0), 3.0);
  EXPECT_EQ(s.neg(0, 0), 0.0);
  EXPECT_EQ(s.pos(0, 1), 0.0);
  EXPECT_EQ(s.neg(0, 1), 3.0);
  EXPECT_EQ(s.pos(0, 2), 0.0);
  EXPECT_EQ(s.neg(0, 2), 0.0);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    Matrix r = oracle::random_matrix(7, 9, rng, -1e6, 1e6);
    auto p = split_signs(r);
    EXPECT_TRUE((p.pos - p.neg) == r);
    EXPECT_GE(p.pos.minCoeff(), 0.0);
    EXPECT_GE(p.neg.minCoeff(), 0.0);
    EXPECT_EQ(p.pos.cwiseProduct(p.neg).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(FitTimecourses, IdentityAndOrthonormalRows) {
  std::mt19937_64 rng(2);
  Matrix X = oracle::random_matrix(10, 6, rng);
  EXPECT_LE(oracle::max_abs(fit_timecourses(X, Matrix::Identity(6, 6)) - X), 1e-12);

  Eigen::HouseholderQR<Matrix> qr(oracle::random_matrix(6, 6, rng));
  const Matrix Q = qr.householderQ();
  const Matrix V = Q.topRows(3);
  EXPECT_LE(oracle::max_abs(fit_timecourses(X, V) - X * V.transpose()), 1e-12);
}

TEST(FitTimecourses, NormalEquationOracleAndResidualOrthogonality) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Index K = 2 + t % 5, S = 10 + t, T = 8 + t % 7;
    const Matrix X = oracle::random_matrix(T, S, rng);
    const Matrix V = oracle::random_nonneg(K, S, rng);
    const Matrix U = fit_timecourses(X, V);
    EXPECT_LE(oracle::rel_diff(U, oracle::normal_equation_right(X, V)), 1e-10);
    const Matrix resid = (X - U * V) * V.transpose();
    EXPECT_LE(oracle::max_abs(resid), 1e-8 * oracle::max_abs(X) * oracle::max_abs(V));
  }
}

TEST(FitTimecourses, ChainComposesCoarseToFine) {
  std::mt19937_64 rng(4);
  const Matrix X = oracle::random_matrix(12, 20, rng);
  const Matrix V1 = oracle::random_nonneg(6, 20, rng), V2 = oracle::random_nonneg(3, 6, rng);
  const std::vector<Matrix> chain{V2, V1};
  EXPECT_LE(oracle::max_abs(fit_timecourses(X, chain) - fit_timecourses(X, Matrix(V2 * V1))), 1e-12);
  EXPECT_THROW(fit_timecourses(X, std::vector<Matrix>{V1, V2}), DataError);
}

TEST(FitTimecourses, RankDeficientGivesMinimumNorm) {
  Matrix V(2, 3);
  V << 1, 1, 0, 2, 2, 0;  // rank 1
  Matrix X(1, 3);
  X << 3, 1, 5;
  const Matrix U = fit_timecourses(X, V);
  // Any U with U V = best rank-1 fit; the minimum-norm one is parallel to (1, 2).
  EXPECT_NEAR(U(0, 1), 2.0 * U(0, 0), 1e-12);
  EXPECT_NEAR((U * V)(0, 0), 2.0, 1e-12);
}

TEST(Aggregates, Examples) {
  std::mt19937_64 rng(5);
  const Matrix V = oracle::random_nonneg(4, 7, rng);
  auto one = own_aggregates(V);
  EXPECT_LE(oracle::max_abs(one.G - V), 1e-15);

  auto twin = compute_group_aggregates(std::vector<Matrix>{V, V});
  EXPECT_LE(oracle::max_abs(twin.G - std::sqrt(2.0) * V), 1e-14);

  const Matrix W = oracle::random_nonneg(4, 7, rng);
  auto agg = compute_group_aggregates(std::vector<Matrix>{V, W});
  for (Eigen::Index k = 0; k < 4; ++k) {
    double l21 = 0.0, sq = 0.0;
    for (Eigen::Index s = 0; s < 7; ++s) {
      const double g = std::sqrt(V(k, s) * V(k, s) + W(k, s) * W(k, s));
      EXPECT_NEAR(agg.G(k, s), g, 1e-14);
      l21 += g;
      sq += V(k, s) * V(k, s) + W(k, s) * W(k, s);
    }
    EXPECT_NEAR(agg.gL21[k], l21, 1e-14 * l21);
    EXPECT_NEAR(agg.gL2[k], std::sqrt(sq), 1e-14);
  }
  EXPECT_THROW(compute_group_aggregates(std::vector<Matrix>{V, Matrix::Ones(3, 7)}), DataError);
}

TEST(Updates, StationaryPointIsFixed) {
  std::mt19937_64 rng(6);
  const Matrix V = oracle::random_nonneg(4, 15, rng);
  const Matrix U = oracle::random_matrix(20, 4, rng);
  const Matrix X = U * V;
  const Matrix out = update_layer_finest(V, U, X, nullptr, own_aggregates(V), 0.0, 0.0);
  EXPECT_LE(oracle::max_abs(out - V), 1e-12);

  const Matrix Vbar = oracle::random_nonneg(6, 15, rng);
  const Matrix Vt = oracle::random_nonneg(3, 6, rng);
  const Matrix U2 = oracle::random_matrix(20, 3, rng);
  const Matrix X2 = U2 * Vt * Vbar;
  const Matrix out2 = update_layer_deep(Vt, U2, X2, Vbar, own_aggregates(Vt), 0.0);
  EXPECT_LE(oracle::max_abs(out2 - Vt), 1e-12);
}

TEST(Updates, PreserveSignAndZeroSupport) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    Matrix V = oracle::random_nonneg(5, 30, rng);
    V(1, 3) = 0.0;
    V.row(4).setZero();
    const Matrix U = oracle::random_matrix(20, 5, rng, -3, 3);
    const Matrix X = oracle::random_matrix(20, 30, rng, -3, 3);
    auto g = NeighborGraph::grid4(5, 6);
    auto ops = build_affinity({"s", X}, g);
    const Matrix a = update_layer_finest(V, U, X, &ops, own_aggregates(V), 4.0, 3.0, 1.0 / (1 + t % 3));
    EXPECT_GE(a.minCoeff(), 0.0);
    EXPECT_TRUE(a.allFinite());
    EXPECT_EQ(a(1, 3), 0.0);
    EXPECT_EQ(a.row(4).cwiseAbs().maxCoeff(), 0.0);

    Matrix Vt = oracle::random_nonneg(3, 5, rng);
    Vt(2, 0) = 0.0;
    const Matrix b = update_layer_deep(Vt, oracle::random_matrix(20, 3, rng), X, V, own_aggregates(Vt), 2.0);
    EXPECT_GE(b.minCoeff(), 0.0);
    EXPECT_EQ(b(2, 0), 0.0);
  }
  Matrix V = Matrix::Ones(2, 4);
  EXPECT_THROW(update_layer_finest(V, Matrix::Ones(3, 2), Matrix::Ones(3, 4), nullptr, own_aggregates(V), 0.0, 1.0),
               DataError);
}

TEST(Updates, FinestFitDescendsWithRefit) {
  std::mt19937_64 rng(8);
  const Eigen::Index T = 20, S = 30, K = 5;
  auto g = NeighborGraph::grid4(5, 6);
  for (int inst = 0; inst < 5; ++inst) {
    const Matrix X = oracle::random_matrix(T, S, rng);
    auto ops = build_affinity({"s", X}, g);
    HierarchySpec spec;
    spec.K = {static_cast<int>(K)};
    const auto w = regularization_weights(spec, 1, T, g);
    Matrix V = random_init(K, S, 100 + inst);
    Matrix U = fit_timecourses(X, V);
    double prev = (X - U * V).squaredNorm();
    for (int it = 0; it < 50; ++it) {
      V = update_layer_finest(V, U, X, &ops, own_aggregates(V), w.lambda_c[0], w.lambda_m);
      U = fit_timecourses(X, V);
      const double fit = (X - U * V).squaredNorm();
      EXPECT_LE(fit, prev * (1 + 1e-6)) << "instance " << inst << " iteration " << it;
      prev = fit;
    }
  }
}

TEST(Updates, DeepReconstructionDescendsWithRefit) {
  std::mt19937_64 rng(9);
  for (int inst = 0; inst < 5; ++inst) {
    const Matrix X = oracle::random_matrix(20, 30, rng);
    const Matrix V1 = random_init(6, 30, 200 + inst);
    Matrix V2 = random_init(3, 6, 300 + inst);
    Matrix U = fit_timecourses(X, Matrix(V2 * V1));
    double prev = (X - U * V2 * V1).norm();
    for (int it = 0; it < 50; ++it) {
      V2 = update_layer_deep(V2, U, X, V1, own_aggregates(V2), 0.0);
      U = fit_timecourses(X, Matrix(V2 * V1));
      const double err = (X - U * V2 * V1).norm();
      EXPECT_LE(err, prev * (1 + 1e-9)) << "instance " << inst << " iteration " << it;
      prev = err;
    }
  }
}

// The joint objective descends under the raw kernels (no row normalisation):
// each layer is updated with U_h times the coarser layers as left factor, then
// U_h is refit.
TEST(Updates, RawKernelsDescendJointObjective) {
  std::mt19937_64 rng(10);
  const std::size_t n = 3;
  auto g = NeighborGraph::grid4(6, 8);
  HierarchySpec spec;
  spec.K = {6, 3};
  int violations = 0, steps = 0;
  for (int inst = 0; inst < 5; ++inst) {
    Cohort c;
    for (std::size_t i = 0; i < n; ++i) c.subjects.push_back({"s" + std::to_string(i), oracle::random_matrix(40, 48, rng)});
    c.graph = g;
    const auto w = regularization_weights(spec, n, 40, g);
    std::vector<SubjectGraphOperators> ops;
    std::vector<FactorStack> st(n);
    for (std::size_t i = 0; i < n; ++i) {
      ops.push_back(build_affinity(c.subjects[i], g));
      st[i].Vt = {random_init(6, 48, 7 + inst), random_init(3, 6, 8 + inst)};
      st[i].U = {Matrix(), fit_timecourses(c.subjects[i].data, st[i].scale_map(1))};
    }
    double prev = objective(c, st, w, ops, spec).total;
    for (int it = 0; it < 30; ++it) {
      for (int j = 0; j < 2; ++j) {
        std::vector<Matrix> layer;
        for (const auto& s : st) layer.push_back(s.Vt[static_cast<std::size_t>(j)]);
        const auto agg = compute_group_aggregates(layer);
        for (std::size_t i = 0; i < n; ++i) {
          const Matrix& X = c.subjects[i].data;
          if (j == 0) {
            const Matrix left = st[i].U[1] * st[i].Vt[1];
            st[i].Vt[0] = update_layer_finest(st[i].Vt[0], left, X, &ops[i], agg, w.lambda_c[0], w.lambda_m);
          } else {
            st[i].Vt[1] = update_layer_deep(st[i].Vt[1], st[i].U[1], X, st[i].Vt[0], agg, w.lambda_c[1]);
          }
          st[i].U[1] = fit_timecourses(X, st[i].scale_map(1));
        }
        const double cur = objective(c, st, w, ops, spec).total;
        ++steps;
        if (cur > prev * (1 + 1e-6)) ++violations;
        prev = cur;
      }
    }
  }
  EXPECT_EQ(violations, 0) << "of " << steps << " layer updates";
}

TEST(Normalize, Examples) {
  Matrix V(3, 3);
  V << 0.2, 0.8, 0.4, 0, 0, 0, 0.5, 1.0, 0.1;
  const Matrix before = V;
  auto scales = normalize_rows_inf(V);
  EXPECT_DOUBLE_EQ(V(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(V(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(V(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(scales[0], 0.8);
  EXPECT_EQ(scales[1], 1.0);
  EXPECT_EQ(scales[2], 1.0);
  EXPECT_TRUE(V.row(2) == before.row(2));
  EXPECT_TRUE(V.row(1).isZero(0));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t) {
    auto once = normalized_rows_inf(oracle::random_nonneg(6, 9, rng) * 7.0);
    auto twice = normalized_rows_inf(once.V);
    EXPECT_TRUE(twice.V == once.V);
    EXPECT_TRUE(twice.scales == Vector::Ones(6));
    for (Eigen::Index k = 0; k < 6; ++k) EXPECT_EQ(once.V.row(k).maxCoeff(), 1.0);
  }
}

TEST(Objective, NaiveRecomputation) {
  std::mt19937_64 rng(12);
  HierarchySpec spec;
  spec.K = {5, 2};
  spec.alpha = 0.7;
  spec.beta = 3.0;
  auto g = NeighborGraph::grid4(4, 5);
  Cohort c;
  for (int i = 0; i < 3; ++i) c.subjects.push_back({"s", oracle::random_matrix(12, 20, rng)});
  c.graph = g;
  const auto w = regularization_weights(spec, 3, 12, g);
  std::vector<FactorStack> st(3);
  std::vector<SubjectGraphOperators> ops;
  for (int i = 0; i < 3; ++i) {
    st[i].Vt = {oracle::random_nonneg(5, 20, rng), oracle::random_nonneg(2, 5, rng)};
    st[i].U = {Matrix(), oracle::random_matrix(12, 2, rng)};
    ops.push_back(build_affinity(c.subjects[static_cast<std::size_t>(i)], g));
  }
  const auto got = objective(c, st, w, ops, spec);

  double fit = 0.0, graph = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Matrix& X = c.subjects[static_cast<std::size_t>(i)].data;
    const Matrix R = st[i].U[1] * st[i].Vt[1] * st[i].Vt[0];
    for (Eigen::Index a = 0; a < X.rows(); ++a)
      for (Eigen::Index b = 0; b < X.cols(); ++b) fit += (X(a, b) - R(a, b)) * (X(a, b) - R(a, b));
    graph += oracle::pairwise_graph_value(st[i].Vt[0], oracle::dense_affinity(X, g));
  }
  double sparsity = 0.0;
  for (int j = 0; j < 2; ++j) {
    std::vector<Matrix> layer;
    for (const auto& s : st) layer.push_back(s.Vt[static_cast<std::size_t>(j)]);
    sparsity += spec.alpha * 3 * 12 / spec.K[static_cast<std::size_t>(j)] * oracle::group_sparsity(layer);
  }
  graph *= spec.beta * 12 / (5 * g.mean_degree());
  const double total = fit + sparsity + graph;
  EXPECT_NEAR(got.fit, fit, 1e-10 * fit);
  EXPECT_NEAR(got.sparsity, sparsity, 1e-10 * sparsity);
  EXPECT_NEAR(got.graph, graph, 1e-10 * graph);
  EXPECT_NEAR(got.total, total, 1e-10 * total);
  EXPECT_NEAR(got.total, got.fit + got.sparsity + got.graph, 1e-12 * got.total);

  RegularizationWeights zero{{0.0, 0.0}, 0.0};
  const auto plain = objective(c, st, zero, {}, spec);
  EXPECT_EQ(plain.total, plain.fit);
  EXPECT_EQ(plain.sparsity, 0.0);
}

TEST(SemiNmf, RecoversExactFactorisation) {
  std::mt19937_64 rng(13);
  for (int inst = 0; inst < 3; ++inst) {
    const Matrix U0 = oracle::random_matrix(40, 4, rng);
    Matrix V0 = oracle::random_nonneg(4, 30, rng);
    const Matrix Y = U0 * V0;
    auto r = sparse_semi_nmf(Y, 4, 0.0, 17 + inst, 2000, 1e-12);
    EXPECT_LE((Y - r.U * r.V).norm() / Y.norm(), 0.05) << "instance " << inst;
    EXPECT_GE(r.V.minCoeff(), 0.0);
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(r.V.row(k).maxCoeff(), 1.0, 1e-12);
  }
}

TEST(SemiNmf, RankOneRecoversLoadings) {
  std::mt19937_64 rng(14);
  const Matrix u = oracle::random_nonneg(25, 1, rng);
  const Matrix v = oracle::random_nonneg(1, 18, rng);
  auto r = sparse_semi_nmf(u * v, 1, 0.0, 3, 500);
  EXPECT_GE(oracle::pearson(oracle::row(r.V, 0), oracle::row(v, 0)), 0.999);
}

TEST(SemiNmf, DeterministicAndValidated) {
  std::mt19937_64 rng(15);
  const Matrix Y = oracle::random_matrix(20, 15, rng);
  auto a = sparse_semi_nmf(Y, 3, 2.0, 99, 40);
  auto b = sparse_semi_nmf(Y, 3, 2.0, 99, 40);
  EXPECT_TRUE(a.V == b.V);
  EXPECT_TRUE(a.U == b.U);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_THROW(sparse_semi_nmf(Y, 16, 0.0, 1, 5), ConfigError);
  EXPECT_THROW(sparse_semi_nmf(Y, 0, 0.0, 1, 5), ConfigError);
}

TEST(Linalg, PseudoInverseProperties) {
  std::mt19937_64 rng(16);
  for (int t = 0; t < 10; ++t) {
    Matrix A = oracle::random_matrix(6, 4, rng) * oracle::random_matrix(4, 9, rng);  // rank 4
    const Matrix P = pseudo_inverse(A);
    EXPECT_LE(oracle::max_abs(A * P * A - A), 1e-10);
    EXPECT_LE(oracle::max_abs(P * A * P - P), 1e-10);
    EXPECT_LE(oracle::max_abs((A * P).transpose() - A * P), 1e-10);
    EXPECT_LE(oracle::max_abs((P * A).transpose() - P * A), 1e-10);
  }
  EXPECT_EQ(pinv_cutoff(3, 5, 2.0), 5 * std::numeric_limits<double>::epsilon() * 2.0);
  EXPECT_TRUE(pseudo_inverse(Matrix::Zero(2, 3)).isZero(0));
}
