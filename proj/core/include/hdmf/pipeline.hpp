#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hdmf/data_model.hpp"
#include "hdmf/factorization.hpp"

namespace hdmf {

enum class Strategy { joint, independent, greedy };

std::string_view to_string(Strategy s);
/// Throws ConfigError for anything other than joint / independent / greedy.
Strategy parse_strategy(std::string_view name);

struct DecompositionResult {
  Strategy strategy = Strategy::joint;
  HierarchySpec spec;
  std::vector<FactorStack> stacks;
  /// One entry per outer iteration; entry 0 is the initialisation.
  std::vector<ObjectiveBreakdown> objective_trace;
  bool converged = false;
  int iterations = 0;
  /// Per scale, rows that are all-zero for at least one subject.
  std::vector<std::vector<int>> dead_components;
};

/// Called after every outer iteration with the iteration number (1-based),
/// the current stacks and the objective just recorded.
using IterationObserver =
    std::function<void(int iteration, std::span<const FactorStack> stacks, const ObjectiveBreakdown& obj)>;

struct RunOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
  IterationObserver on_iteration;
};

/// Greedy layer-wise group initialisation on temporally concatenated data.
/// Returns {Vt_1 (K_1 x S), Vt_2 (K_2 x K_1), ...}.
std::vector<Matrix> pretrain_greedy(const Cohort& cohort, const HierarchySpec& spec);

/// Joint collaborative optimisation of all scales starting from `init`
/// (group layers copied to every subject).
DecompositionResult refine_joint(const Cohort& cohort, const HierarchySpec& spec, const std::vector<Matrix>& init,
                                 const RunOptions& opts = {});

DecompositionResult decompose_joint(const Cohort& cohort, const HierarchySpec& spec, const RunOptions& opts = {});
DecompositionResult decompose_independent(const Cohort& cohort, const HierarchySpec& spec,
                                          const RunOptions& opts = {});
DecompositionResult decompose_greedy(const Cohort& cohort, const HierarchySpec& spec, const RunOptions& opts = {});

DecompositionResult decompose(const Cohort& cohort, const HierarchySpec& spec, Strategy strategy,
                              const RunOptions& opts = {});

}  // namespace hdmf
