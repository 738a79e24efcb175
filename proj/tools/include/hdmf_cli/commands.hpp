#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "hdmf/pipeline.hpp"
#include "hdmf_cli/config.hpp"

namespace hdmf::cli {

struct Context {
  RunConfig config;
  unsigned threads = 1;
  bool quiet = false;
  std::ostream* out = nullptr;
};

enum class MapFormat { csv, pgm };

/// Cohort layout into `out_dir`, ground truth into out_dir/truth and, when
/// [simulate] events > 0, activation maps into out_dir/activations.
void cmd_simulate(const Context& ctx, const fs::path& out_dir);

void cmd_decompose(const Context& ctx, const fs::path& data_dir, Strategy strategy, const fs::path& out_dir);

/// report.json: one row per (subject, event, feature set). Feature sets are
/// every single scale plus "multi" ([evaluate] scales_used, default all).
/// Paired Wilcoxon tests compare multi against each single scale on the
/// per-subject mean r.
void cmd_evaluate(const Context& ctx, const fs::path& result_dir, const fs::path& data_dir,
                  const fs::path& activations_dir, const fs::path& out_path);

/// Pairwise Wilcoxon table over per-subject mean r of one feature set.
void cmd_compare(const Context& ctx, const std::vector<fs::path>& reports, const fs::path& out_path,
                 const std::string& feature_set);

/// Mean-over-subjects maps of a 1-based scale. CSV: scale<j>.csv with one row
/// per component. PGM: scale<j>_component<k>.pgm per component (needs grid
/// metadata). Both write the sidecar scale<j>.meta.
void cmd_export_maps(const Context& ctx, const fs::path& result_dir, int scale, const fs::path& out_dir,
                     MapFormat format);

/// Full command line entry point. Returns the process exit code: 0 success,
/// 2 usage or configuration error, 1 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdmf::cli
