#include "hdmf/pipeline.hpp"

#include <cmath>
#include <set>

#include "hdmf/error.hpp"
#include "hdmf/parallel.hpp"
#include "hdmf/regularizers.hpp"

namespace hdmf {
namespace {

constexpr int kMaxStepHalvings = 8;

bool small_change(double prev, double cur, double rel_tol) {
  return std::abs(prev - cur) < rel_tol * std::max(std::abs(prev), 1e-300);
}

Matrix concat_time(const Cohort& cohort) {
  const auto T = static_cast<Eigen::Index>(cohort.T());
  Matrix X(T * static_cast<Eigen::Index>(cohort.n()), static_cast<Eigen::Index>(cohort.S()));
  for (std::size_t i = 0; i < cohort.n(); ++i) {
    X.middleRows(static_cast<Eigen::Index>(i) * T, T) = cohort.subjects[i].data;
  }
  return X;
}

std::vector<std::vector<int>> find_dead(std::span<const FactorStack> stacks, int h) {
  std::vector<std::vector<int>> dead(static_cast<std::size_t>(h));
  for (int j = 0; j < h; ++j) {
    std::set<int> rows;
    for (const auto& st : stacks) {
      const Matrix& v = st.Vt[static_cast<std::size_t>(j)];
      for (Eigen::Index k = 0; k < v.rows(); ++k) {
        if ((v.row(k).array() == 0.0).all()) rows.insert(static_cast<int>(k));
      }
    }
    dead[static_cast<std::size_t>(j)].assign(rows.begin(), rows.end());
  }
  return dead;
}

HierarchySpec single_scale(const HierarchySpec& spec, int j) {
  HierarchySpec sub = spec;
  sub.K = {spec.K[static_cast<std::size_t>(j)]};
  return sub;
}

// Stitches per-scale h=1 runs into one non-nested result.
DecompositionResult assemble_separate(Strategy strategy, const HierarchySpec& spec,
                                      std::vector<DecompositionResult>& runs) {
  DecompositionResult out;
  out.strategy = strategy;
  out.spec = spec;
  out.converged = true;
  const std::size_t n = runs.front().stacks.size();
  out.stacks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.stacks[i].subject_id = runs.front().stacks[i].subject_id;
    out.stacks[i].nested = false;
    for (auto& run : runs) {
      out.stacks[i].Vt.push_back(std::move(run.stacks[i].Vt.front()));
      out.stacks[i].U.push_back(std::move(run.stacks[i].U.front()));
    }
  }
  // Trace: per-iteration sum over scales, holding a finished run at its last value.
  std::size_t len = 0;
  for (const auto& run : runs) {
    len = std::max(len, run.objective_trace.size());
    out.converged = out.converged && run.converged;
    out.iterations = std::max(out.iterations, run.iterations);
    out.dead_components.push_back(run.dead_components.front());
  }
  for (std::size_t t = 0; t < len; ++t) {
    ObjectiveBreakdown sum;
    for (const auto& run : runs) {
      const auto& o = run.objective_trace[std::min(t, run.objective_trace.size() - 1)];
      sum.fit += o.fit;
      sum.sparsity += o.sparsity;
      sum.graph += o.graph;
      sum.total += o.total;
    }
    out.objective_trace.push_back(sum);
  }
  return out;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::joint:
      return "joint";
    case Strategy::independent:
      return "independent";
    case Strategy::greedy:
      return "greedy";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "joint") return Strategy::joint;
  if (name == "independent") return Strategy::independent;
  if (name == "greedy") return Strategy::greedy;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected joint, independent or greedy)");
}

std::vector<Matrix> pretrain_greedy(const Cohort& cohort, const HierarchySpec& spec) {
  validate_cohort(cohort);
  spec.validate(cohort.T(), cohort.S());
  std::vector<Matrix> layers;
  Matrix input = concat_time(cohort);
  const double rows = static_cast<double>(input.rows());
  for (int j = 0; j < spec.h(); ++j) {
    const int K = spec.K[static_cast<std::size_t>(j)];
    auto res = sparse_semi_nmf(input, K, spec.alpha * rows / K, spec.seed + static_cast<std::uint64_t>(j),
                               spec.pretrain_iters, spec.rel_tol);
    layers.push_back(std::move(res.V));
    input = std::move(res.U);
  }
  return layers;
}

DecompositionResult refine_joint(const Cohort& cohort, const HierarchySpec& spec, const std::vector<Matrix>& init,
                                 const RunOptions& opts) {
  validate_cohort(cohort);
  spec.validate(cohort.T(), cohort.S());
  const int h = spec.h();
  if (static_cast<int>(init.size()) != h) throw DataError("refine_joint: one initial layer per scale expected");
  const std::size_t n = cohort.n();
  const auto weights = regularization_weights(spec, n, cohort.T(), cohort.graph);

  std::vector<SubjectGraphOperators> ops;
  if (weights.lambda_m != 0.0) {
    ops.resize(n);
    parallel_for(n, opts.threads, [&](std::size_t i) { ops[i] = build_affinity(cohort.subjects[i], cohort.graph); });
  }

  DecompositionResult res;
  res.strategy = Strategy::joint;
  res.spec = spec;
  res.stacks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& st = res.stacks[i];
    st.subject_id = cohort.subjects[i].subject_id;
    st.Vt = init;
    st.U.resize(static_cast<std::size_t>(h));
  }

  auto refit = [&](std::size_t i, int j) {
    auto& st = res.stacks[i];
    st.U[static_cast<std::size_t>(j)] = fit_timecourses(cohort.subjects[i].data, st.scale_map(j));
  };
  auto refit_all = [&] {
    parallel_for(n, opts.threads, [&](std::size_t i) {
      for (int j = 0; j < h; ++j) refit(i, j);
    });
  };

  refit_all();
  res.objective_trace.push_back(objective(cohort, res.stacks, weights, ops, spec));

  std::vector<const Matrix*> layer(n);
  std::vector<Matrix> coupled(n);
  std::vector<Matrix> saved_layer(n), saved_coarser(n);
  ObjectiveBreakdown current = res.objective_trace.back();
  for (int it = 1; it <= spec.max_outer_iters; ++it) {
    const double prev = current.total;
    for (int j = 0; j < h; ++j) {
      const auto js = static_cast<std::size_t>(j);
      const auto hs = static_cast<std::size_t>(h - 1);
      // Left factor of Vt_j with U_h and all other layers held fixed:
      // U_h Vt_h ... Vt_{j+1}.
      parallel_for(n, opts.threads, [&](std::size_t i) {
        refit(i, h - 1);
        auto& st = res.stacks[i];
        Matrix left = st.U[hs];
        for (int k = h - 1; k > j; --k) left = left * st.Vt[static_cast<std::size_t>(k)];
        coupled[i] = std::move(left);
        saved_layer[i] = st.Vt[js];
        if (j + 1 < h) saved_coarser[i] = st.Vt[js + 1];
      });

      for (std::size_t i = 0; i < n; ++i) layer[i] = &saved_layer[i];
      const auto agg = compute_group_aggregates(std::span<const Matrix* const>(layer));

      auto apply = [&](double step) {
        parallel_for(n, opts.threads, [&](std::size_t i) {
          auto& st = res.stacks[i];
          const Matrix& X = cohort.subjects[i].data;
          if (j == 0) {
            st.Vt[0] = update_layer_finest(saved_layer[i], coupled[i], X, ops.empty() ? nullptr : &ops[i], agg,
                                           weights.lambda_c[0], weights.lambda_m, step);
          } else {
            st.Vt[js] = update_layer_deep(saved_layer[i], coupled[i], X, st.scale_map(j - 1), agg,
                                          weights.lambda_c[js], step);
          }
          const Vector scales = normalize_rows_inf(st.Vt[js]);
          // Keep coarser scale maps unchanged by the normalisation.
          if (j + 1 < h) st.Vt[js + 1] = saved_coarser[i] * scales.asDiagonal();
          refit(i, h - 1);
        });
        return objective(cohort, res.stacks, weights, ops, spec);
      };
      double step = 1.0;
      ObjectiveBreakdown trial = apply(step);
      if (spec.backtracking) {
        int halvings = 0;
        while (trial.total > current.total && halvings < kMaxStepHalvings) {
          step *= 0.5;
          ++halvings;
          trial = apply(step);
        }
        // No step descends: keep the layer, but still project it. Its rows
        // can carry scales pushed up from the finer layer earlier in the sweep.
        if (trial.total > current.total) trial = apply(0.0);
      }
      current = trial;
    }

    res.objective_trace.push_back(current);
    res.iterations = it;
    if (opts.on_iteration) opts.on_iteration(it, res.stacks, current);
    if (small_change(prev, current.total, spec.rel_tol)) {
      res.converged = true;
      break;
    }
  }

  refit_all();
  res.dead_components = find_dead(res.stacks, h);
  return res;
}

DecompositionResult decompose_joint(const Cohort& cohort, const HierarchySpec& spec, const RunOptions& opts) {
  validate_cohort(cohort);
  spec.validate(cohort.T(), cohort.S());
  // Surface weight configuration errors before the (expensive) pre-training.
  regularization_weights(spec, cohort.n(), cohort.T(), cohort.graph);
  return refine_joint(cohort, spec, pretrain_greedy(cohort, spec), opts);
}

DecompositionResult decompose_independent(const Cohort& cohort, const HierarchySpec& spec, const RunOptions& opts) {
  validate_cohort(cohort);
  spec.validate(cohort.T(), cohort.S());
  regularization_weights(spec, cohort.n(), cohort.T(), cohort.graph);
  std::vector<DecompositionResult> runs;
  for (int j = 0; j < spec.h(); ++j) {
    auto sub = single_scale(spec, j);
    sub.seed = spec.seed + static_cast<std::uint64_t>(j);
    runs.push_back(decompose_joint(cohort, sub, opts));
  }
  return assemble_separate(Strategy::independent, spec, runs);
}

DecompositionResult decompose_greedy(const Cohort& cohort, const HierarchySpec& spec, const RunOptions& opts) {
  validate_cohort(cohort);
  spec.validate(cohort.T(), cohort.S());
  regularization_weights(spec, cohort.n(), cohort.T(), cohort.graph);
  const auto layers = pretrain_greedy(cohort, spec);
  std::vector<DecompositionResult> runs;
  Matrix product;
  for (int j = 0; j < spec.h(); ++j) {
    product = j == 0 ? layers[0] : Matrix(layers[static_cast<std::size_t>(j)] * product);
    runs.push_back(refine_joint(cohort, single_scale(spec, j), {normalized_rows_inf(product).V}, opts));
  }
  return assemble_separate(Strategy::greedy, spec, runs);
}

DecompositionResult decompose(const Cohort& cohort, const HierarchySpec& spec, Strategy strategy,
                              const RunOptions& opts) {
  switch (strategy) {
    case Strategy::joint:
      return decompose_joint(cohort, spec, opts);
    case Strategy::independent:
      return decompose_independent(cohort, spec, opts);
    case Strategy::greedy:
      return decompose_greedy(cohort, spec, opts);
  }
  throw ConfigError("unknown strategy");
}

}  // namespace hdmf
