#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdmf/data_model.hpp"
#include "hdmf/io.hpp"

namespace hdmf::cli {

namespace fs = std::filesystem;

struct SimulateSettings {
  GridShape grid{6, 6};
  std::size_t n = 2;
  std::size_t T = 100;
  double noise_sigma = 0.1;
  double subject_jitter = 0.1;
  /// Number of synthetic activation maps per subject (0 = none).
  std::size_t events = 0;
};

struct EvaluateSettings {
  /// 1-based scales forming the multi-scale feature set; empty = all.
  std::vector<int> scales_used;
  /// Optional events manifest overriding <activations_dir>/events.meta.
  std::optional<fs::path> events;
};

/// INI-style run configuration:
///
///   [data]       cohort_dir, activations_dir
///   [hierarchy]  h, K, alpha, beta, seed, max_outer_iters, rel_tol,
///                pretrain_iters, backtracking
///   [simulate]   grid (RxC), n, T, noise_sigma, subject_jitter, events
///   [evaluate]   scales_used, events
///
/// '#' and ';' start comments. Unknown sections or keys are rejected.
struct RunConfig {
  HierarchySpec spec;
  std::optional<fs::path> cohort_dir;
  std::optional<fs::path> activations_dir;
  SimulateSettings simulate;
  EvaluateSettings evaluate;

  /// Throws ConfigError when [hierarchy] K was never given.
  const HierarchySpec& hierarchy() const;
};

/// Parses configuration text; relative paths resolve against `base_dir`.
/// Throws ConfigError with the offending line number.
RunConfig parse_config(const std::string& text, const fs::path& base_dir = {});
RunConfig load_config(const fs::path& path);

GridShape parse_grid(const std::string& text);

}  // namespace hdmf::cli
