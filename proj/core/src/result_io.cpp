#include "hdmf/result_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hdmf/error.hpp"

namespace hdmf {
namespace {

std::string encode_dead(const std::vector<std::vector<int>>& dead) {
  std::string out;
  for (std::size_t j = 0; j < dead.size(); ++j) {
    if (j) out.push_back(';');
    out += std::to_string(j + 1) + ":" + join_ints(dead[j], ' ');
  }
  return out;
}

std::vector<std::vector<int>> decode_dead(const std::string& text, int h) {
  std::vector<std::vector<int>> dead(static_cast<std::size_t>(h));
  for (const auto& item : split_list(text, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw FormatError("result.meta: bad dead_components entry '" + item + "'");
    const int j = std::stoi(item.substr(0, colon)) - 1;
    if (j < 0 || j >= h) throw FormatError("result.meta: dead_components scale out of range");
    for (const auto& v : split_list(item.substr(colon + 1), ' ')) dead[static_cast<std::size_t>(j)].push_back(std::stoi(v));
  }
  return dead;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError(what + ": expected a number, got '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_result(const DecompositionResult& result, const fs::path& dir, const std::optional<GridShape>& grid) {
  fs::create_directories(dir);
  std::string ids;
  for (std::size_t i = 0; i < result.stacks.size(); ++i) {
    const auto& st = result.stacks[i];
    if (i) ids.push_back(',');
    ids += st.subject_id;
    for (int j = 0; j < st.h(); ++j) {
      const auto scale = std::to_string(j + 1);
      store_matrix(st.Vt[static_cast<std::size_t>(j)], dir / ("Vt_" + st.subject_id + "_" + scale + ".dmat"));
      store_matrix(st.U[static_cast<std::size_t>(j)], dir / ("U_" + st.subject_id + "_" + scale + ".dmat"));
    }
  }

  std::ostringstream trace;
  trace << "iter,fit,sparsity,graph,total\n";
  for (std::size_t t = 0; t < result.objective_trace.size(); ++t) {
    const auto& o = result.objective_trace[t];
    trace << t << ',' << format_double(o.fit) << ',' << format_double(o.sparsity) << ',' << format_double(o.graph)
          << ',' << format_double(o.total) << '\n';
  }
  std::ofstream(dir / "trace.csv", std::ios::binary | std::ios::trunc) << trace.str();

  const auto& spec = result.spec;
  MetaFile meta;
  meta.set("strategy", std::string(to_string(result.strategy)));
  meta.set("h", std::to_string(spec.h()));
  meta.set("K", join_ints(spec.K));
  meta.set("alpha", format_double(spec.alpha));
  meta.set("beta", format_double(spec.beta));
  meta.set("seed", std::to_string(spec.seed));
  meta.set("max_outer_iters", std::to_string(spec.max_outer_iters));
  meta.set("rel_tol", format_double(spec.rel_tol));
  meta.set("pretrain_iters", std::to_string(spec.pretrain_iters));
  meta.set("backtracking", spec.backtracking ? "true" : "false");
  meta.set("converged", result.converged ? "true" : "false");
  meta.set("iterations", std::to_string(result.iterations));
  meta.set("dead_components", encode_dead(result.dead_components));
  meta.set("subjects", ids);
  if (grid) {
    meta.set("grid_rows", std::to_string(grid->rows));
    meta.set("grid_cols", std::to_string(grid->cols));
  }
  meta.write(dir / "result.meta");
}

LoadedResult read_result(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw FormatError("result directory '" + dir.string() + "' does not exist");
  const auto meta = MetaFile::read(dir / "result.meta");
  LoadedResult out;
  auto& res = out.result;
  res.strategy = parse_strategy(meta.require("strategy"));
  res.spec.K = parse_int_list(meta.require("K"));
  res.spec.alpha = parse_double(meta.require("alpha"), "alpha");
  res.spec.beta = parse_double(meta.require("beta"), "beta");
  res.spec.seed = std::stoull(meta.require("seed"));
  res.spec.max_outer_iters = std::stoi(meta.require("max_outer_iters"));
  res.spec.rel_tol = parse_double(meta.require("rel_tol"), "rel_tol");
  if (auto p = meta.get("pretrain_iters")) res.spec.pretrain_iters = std::stoi(*p);
  if (auto b = meta.get("backtracking")) res.spec.backtracking = *b == "true";
  res.converged = meta.require("converged") == "true";
  res.iterations = std::stoi(meta.require("iterations"));
  const int h = res.spec.h();
  if (std::stoi(meta.require("h")) != h) throw FormatError("result.meta: h does not match K");
  res.dead_components = decode_dead(meta.require("dead_components"), h);

  for (const auto& id : split_list(meta.require("subjects"))) {
    FactorStack st;
    st.subject_id = id;
    st.nested = res.strategy == Strategy::joint;
    for (int j = 1; j <= h; ++j) {
      st.Vt.push_back(load_matrix(dir / ("Vt_" + id + "_" + std::to_string(j) + ".dmat")));
      st.U.push_back(load_matrix(dir / ("U_" + id + "_" + std::to_string(j) + ".dmat")));
    }
    res.stacks.push_back(std::move(st));
  }

  std::ifstream trace(dir / "trace.csv");
  if (!trace) throw FormatError("missing trace.csv in '" + dir.string() + "'");
  std::string line;
  std::getline(trace, line);
  while (std::getline(trace, line)) {
    if (line.empty()) continue;
    const auto cells = split_list(line);
    if (cells.size() != 5) throw FormatError("trace.csv: expected 5 columns, got '" + line + "'");
    res.objective_trace.push_back({parse_double(cells[1], "fit"), parse_double(cells[2], "sparsity"),
                                   parse_double(cells[3], "graph"), parse_double(cells[4], "total")});
  }
  if (auto r = meta.get("grid_rows"), c = meta.get("grid_cols"); r && c) {
    out.grid = GridShape{std::stoull(*r), std::stoull(*c)};
  }
  return out;
}

}  // namespace hdmf
