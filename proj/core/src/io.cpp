#include "hdmf/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "hdmf/error.hpp"

namespace hdmf {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::size_t parse_size(const std::string& text, const std::string& what) {
  std::size_t v = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw FormatError(what + ": expected an integer, got '" + text + "'");
  return v;
}

}  // namespace

std::string encode_dmat(const Matrix& m) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (static_cast<std::uint64_t>(m.rows()) > kMax || static_cast<std::uint64_t>(m.cols()) > kMax) {
    throw FormatError("matrix dimensions exceed the 32-bit DMAT header");
  }
  std::string out;
  out.reserve(kDmatHeaderBytes + 8 * static_cast<std::size_t>(m.size()));
  out.append("DMF1", 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_u32(out, 0);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto bits = std::bit_cast<std::uint64_t>(m(r, c));
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
    }
  }
  return out;
}

Matrix decode_dmat(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kDmatHeaderBytes) throw FormatError(origin + ": truncated DMAT header");
  if (std::memcmp(bytes.data(), "DMF1", 4) != 0) throw FormatError(origin + ": bad DMAT magic");
  const std::uint64_t rows = get_u32(bytes, 4);
  const std::uint64_t cols = get_u32(bytes, 8);
  if (get_u32(bytes, 12) != 0) throw FormatError(origin + ": reserved DMAT header bytes are not zero");
  const std::uint64_t count = rows * cols;  // both < 2^32, cannot overflow
  if (count > (std::numeric_limits<std::uint64_t>::max() - kDmatHeaderBytes) / 8 ||
      count > static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max())) {
    throw FormatError(origin + ": DMAT dimensions overflow");
  }
  const std::uint64_t expected = kDmatHeaderBytes + 8 * count;
  if (bytes.size() < expected) throw FormatError(origin + ": truncated DMAT payload");
  if (bytes.size() > expected) throw FormatError(origin + ": trailing bytes after DMAT payload");

  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t off = kDmatHeaderBytes;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::uint64_t bits = 0;
      for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
      }
      m(r, c) = std::bit_cast<double>(bits);
      off += 8;
    }
  }
  return m;
}

void store_matrix(const Matrix& m, const fs::path& path) { write_file(path, encode_dmat(m)); }

Matrix load_matrix(const fs::path& path) { return decode_dmat(read_file(path), path.string()); }

NeighborGraph read_edge_list(const fs::path& path, std::size_t node_count) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open edge list '" + path.string() + "'");
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ls(t);
    long long a = -1, b = -1;
    std::string extra;
    if (!(ls >> a >> b) || (ls >> extra) || a < 0 || b < 0) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'a b', got '" + t + "'");
    }
    edges.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  try {
    return NeighborGraph(node_count, std::move(edges));
  } catch (const DataError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_edge_list(const NeighborGraph& g, const fs::path& path) {
  std::ostringstream out;
  out << "# nodes " << g.node_count() << "\n";
  for (const auto& e : g.edges()) out << e.a << ' ' << e.b << '\n';
  write_file(path, out.str());
}

void MetaFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

std::optional<std::string> MetaFile::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& MetaFile::require(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw FormatError("meta file: missing key '" + key + "'");
}

MetaFile MetaFile::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  MetaFile meta;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError(path.string() + ": expected key=value, got '" + t + "'");
    meta.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return meta;
}

void MetaFile::write(const fs::path& path) const {
  std::ostringstream out;
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  write_file(path, out.str());
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(sep);
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw FormatError("expected an integer list, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

void write_cohort(const Cohort& cohort, const fs::path& dir, const std::optional<GridShape>& grid) {
  fs::create_directories(dir);
  MetaFile meta;
  meta.set("n", std::to_string(cohort.n()));
  meta.set("T", std::to_string(cohort.T()));
  meta.set("S", std::to_string(cohort.S()));
  std::string ids;
  for (std::size_t i = 0; i < cohort.subjects.size(); ++i) {
    if (i) ids.push_back(',');
    ids += cohort.subjects[i].subject_id;
    store_matrix(cohort.subjects[i].data, dir / ("subject_" + cohort.subjects[i].subject_id + ".dmat"));
  }
  meta.set("subjects", ids);
  if (grid) {
    meta.set("grid_rows", std::to_string(grid->rows));
    meta.set("grid_cols", std::to_string(grid->cols));
  }
  write_edge_list(cohort.graph, dir / "graph.edges");
  meta.write(dir / "cohort.meta");
}

LoadedCohort read_cohort(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("cohort directory '" + dir.string() + "' does not exist");
  const auto meta = MetaFile::read(dir / "cohort.meta");
  const auto n = parse_size(meta.require("n"), "cohort.meta n");
  const auto T = parse_size(meta.require("T"), "cohort.meta T");
  const auto S = parse_size(meta.require("S"), "cohort.meta S");

  std::vector<std::string> ids;
  if (auto listed = meta.get("subjects")) {
    ids = split_list(*listed);
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.starts_with("subject_") && name.ends_with(".dmat")) {
        ids.push_back(name.substr(8, name.size() - 8 - 5));
      }
    }
    std::sort(ids.begin(), ids.end());
  }
  if (ids.size() != n) {
    throw FormatError("cohort.meta: n = " + std::to_string(n) + " but " + std::to_string(ids.size()) +
                      " subjects found");
  }

  LoadedCohort out;
  for (const auto& id : ids) {
    Matrix data = load_matrix(dir / ("subject_" + id + ".dmat"));
    if (static_cast<std::size_t>(data.rows()) != T || static_cast<std::size_t>(data.cols()) != S) {
      throw DataError("subject '" + id + "' is " + std::to_string(data.rows()) + "x" +
                      std::to_string(data.cols()) + ", cohort.meta says " + std::to_string(T) + "x" +
                      std::to_string(S));
    }
    out.cohort.subjects.push_back({id, std::move(data)});
  }
  out.cohort.graph = read_edge_list(dir / "graph.edges", S);
  if (auto r = meta.get("grid_rows"), c = meta.get("grid_cols"); r && c) {
    out.grid = GridShape{parse_size(*r, "grid_rows"), parse_size(*c, "grid_cols")};
  }
  validate_cohort(out.cohort);
  return out;
}

}  // namespace hdmf
