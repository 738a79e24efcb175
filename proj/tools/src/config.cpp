#include "hdmf_cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hdmf/error.hpp"

namespace hdmf::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& value, const std::string& key) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<int> parse_ints(const std::string& value, const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(value)) out.push_back(parse_number<int>(trim(item), key));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

const HierarchySpec& RunConfig::hierarchy() const {
  if (spec.K.empty()) throw ConfigError("configuration: [hierarchy] K is required");
  return spec;
}

GridShape parse_grid(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ConfigError("grid: expected ROWSxCOLS, got '" + text + "'");
  GridShape g;
  g.rows = parse_number<std::size_t>(trim(text.substr(0, x)), "grid");
  g.cols = parse_number<std::size_t>(trim(text.substr(x + 1)), "grid");
  if (g.rows == 0 || g.cols == 0) throw ConfigError("grid: dimensions must be positive");
  return g;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  RunConfig cfg;
  std::optional<int> declared_h;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"data",
       {{"cohort_dir", [&](const std::string& v) { cfg.cohort_dir = resolve(v, base_dir); }},
        {"activations_dir", [&](const std::string& v) { cfg.activations_dir = resolve(v, base_dir); }}}},
      {"hierarchy",
       {{"h", [&](const std::string& v) { declared_h = parse_number<int>(v, "h"); }},
        {"K", [&](const std::string& v) { cfg.spec.K = parse_ints(v, "K"); }},
        {"alpha", [&](const std::string& v) { cfg.spec.alpha = parse_number<double>(v, "alpha"); }},
        {"beta", [&](const std::string& v) { cfg.spec.beta = parse_number<double>(v, "beta"); }},
        {"seed", [&](const std::string& v) { cfg.spec.seed = parse_number<std::uint64_t>(v, "seed"); }},
        {"max_outer_iters",
         [&](const std::string& v) { cfg.spec.max_outer_iters = parse_number<int>(v, "max_outer_iters"); }},
        {"rel_tol", [&](const std::string& v) { cfg.spec.rel_tol = parse_number<double>(v, "rel_tol"); }},
        {"pretrain_iters",
         [&](const std::string& v) { cfg.spec.pretrain_iters = parse_number<int>(v, "pretrain_iters"); }},
        {"backtracking", [&](const std::string& v) { cfg.spec.backtracking = parse_bool(v, "backtracking"); }}}},
      {"simulate",
       {{"grid", [&](const std::string& v) { cfg.simulate.grid = parse_grid(v); }},
        {"n", [&](const std::string& v) { cfg.simulate.n = parse_number<std::size_t>(v, "n"); }},
        {"T", [&](const std::string& v) { cfg.simulate.T = parse_number<std::size_t>(v, "T"); }},
        {"noise_sigma",
         [&](const std::string& v) { cfg.simulate.noise_sigma = parse_number<double>(v, "noise_sigma"); }},
        {"subject_jitter",
         [&](const std::string& v) { cfg.simulate.subject_jitter = parse_number<double>(v, "subject_jitter"); }},
        {"events", [&](const std::string& v) { cfg.simulate.events = parse_number<std::size_t>(v, "events"); }}}},
      {"evaluate",
       {{"scales_used", [&](const std::string& v) { cfg.evaluate.scales_used = parse_ints(v, "scales_used"); }},
        {"events", [&](const std::string& v) { cfg.evaluate.events = resolve(v, base_dir); }}}},
  };

  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!keys.contains(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = keys.at(section);
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      it->second(value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }

  if (declared_h && !cfg.spec.K.empty() && *declared_h != cfg.spec.h()) {
    throw ConfigError("configuration: h = " + std::to_string(*declared_h) + " but K lists " +
                      std::to_string(cfg.spec.h()) + " scales");
  }
  if (!cfg.spec.K.empty()) cfg.spec.validate();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

}  // namespace hdmf::cli
