#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hdmf/data_model.hpp"

namespace hdmf {

namespace fs = std::filesystem;

// DMAT: "DMF1", u32 LE rows, u32 LE cols, u32 zero, then rows*cols binary64 LE
// values in row-major order.
inline constexpr std::size_t kDmatHeaderBytes = 16;

void store_matrix(const Matrix& m, const fs::path& path);
Matrix load_matrix(const fs::path& path);

/// Serialises into an in-memory byte string (same layout as the file).
std::string encode_dmat(const Matrix& m);
Matrix decode_dmat(const std::string& bytes, const std::string& origin = "<memory>");

/// "a b" per line, '#' comments. Endpoints validated against node_count.
NeighborGraph read_edge_list(const fs::path& path, std::size_t node_count);
void write_edge_list(const NeighborGraph& g, const fs::path& path);

/// Ordered key=value file. Insertion order is preserved on write so files
/// are byte-stable.
class MetaFile {
 public:
  void set(const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& key) const;
  /// Throws FormatError when the key is absent.
  const std::string& require(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  static MetaFile read(const fs::path& path);
  void write(const fs::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Optional grid layout carried alongside a cohort (synthetic cohorts only).
struct GridShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// subject_<id>.dmat per subject, graph.edges and cohort.meta (n, T, S,
/// subjects, optional grid_rows / grid_cols).
void write_cohort(const Cohort& cohort, const fs::path& dir,
                  const std::optional<GridShape>& grid = std::nullopt);

struct LoadedCohort {
  Cohort cohort;
  std::optional<GridShape> grid;
};
LoadedCohort read_cohort(const fs::path& dir);

/// Helpers for comma-separated lists used in meta and config files.
std::vector<std::string> split_list(const std::string& text, char sep = ',');
std::string join_ints(const std::vector<int>& values, char sep = ',');
std::vector<int> parse_int_list(const std::string& text);

}  // namespace hdmf
