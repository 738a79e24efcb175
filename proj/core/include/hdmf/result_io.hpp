#pragma once

#include <optional>

#include "hdmf/io.hpp"
#include "hdmf/pipeline.hpp"

namespace hdmf {

/// Result directory layout:
///   Vt_<subject>_<scale>.dmat, U_<subject>_<scale>.dmat (scales 1-based)
///   trace.csv   iter,fit,sparsity,graph,total
///   result.meta strategy, spec, convergence and dead components
void write_result(const DecompositionResult& result, const fs::path& dir,
                  const std::optional<GridShape>& grid = std::nullopt);

struct LoadedResult {
  DecompositionResult result;
  std::optional<GridShape> grid;
};
LoadedResult read_result(const fs::path& dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace hdmf
