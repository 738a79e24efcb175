#include "hdmf_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "hdmf/activations.hpp"
#include "hdmf/error.hpp"
#include "hdmf/evaluation.hpp"
#include "hdmf/result_io.hpp"
#include "hdmf/stats.hpp"
#include "hdmf/synthetic.hpp"

namespace hdmf::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kReportFormat = "hdmf-report-1";
constexpr const char* kCompareFormat = "hdmf-compare-1";

std::ostream& say(const Context& ctx) {
  static std::ofstream sink;
  return ctx.quiet || ctx.out == nullptr ? sink : *ctx.out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> subject_ids(const Cohort& c) {
  std::vector<std::string> ids;
  for (const auto& s : c.subjects) ids.push_back(s.subject_id);
  return ids;
}

json wilcoxon_json(std::span<const double> a, std::span<const double> b) {
  json t;
  try {
    const auto w = wilcoxon_signed_rank(a, b);
    t["statistic"] = w.statistic;
    t["p"] = w.p;
    t["n_used"] = w.n_used;
    t["exact"] = w.exact;
    t["all_zero"] = w.all_zero;
  } catch (const DataError& e) {
    t["statistic"] = nullptr;
    t["p"] = nullptr;
    t["note"] = e.what();
  }
  return t;
}

std::vector<int> one_based(const std::vector<int>& zero_based) {
  std::vector<int> out;
  for (int j : zero_based) out.push_back(j + 1);
  return out;
}

}  // namespace

void cmd_simulate(const Context& ctx, const fs::path& out_dir) {
  const auto& spec = ctx.config.hierarchy();
  const auto& sim = ctx.config.simulate;
  SyntheticOptions opts;
  opts.n = sim.n;
  opts.T = sim.T;
  opts.grid = sim.grid;
  opts.noise_sigma = sim.noise_sigma;
  opts.subject_jitter = sim.subject_jitter;
  opts.seed = spec.seed;
  const auto sc = generate_synthetic_cohort(spec, opts);
  const auto ids = subject_ids(sc.cohort);
  write_cohort(sc.cohort, out_dir, sim.grid);
  write_ground_truth(sc.truth, ids, out_dir / "truth");
  if (sim.events > 0) {
    write_activations(synthetic_activations(sc.truth, sim.n, sim.events, spec.seed + 1), ids, out_dir / "activations");
  }
  say(ctx) << "simulated n=" << sim.n << " T=" << sim.T << " S=" << sc.cohort.S() << " K=" << join_ints(spec.K)
           << " events=" << sim.events << " -> " << out_dir.string() << '\n';
}

void cmd_decompose(const Context& ctx, const fs::path& data_dir, Strategy strategy, const fs::path& out_dir) {
  const auto& spec = ctx.config.hierarchy();
  const auto loaded = read_cohort(data_dir);
  RunOptions opts;
  opts.threads = ctx.threads;
  const auto result = decompose(loaded.cohort, spec, strategy, opts);
  write_result(result, out_dir, loaded.grid);
  const auto& last = result.objective_trace.back();
  say(ctx) << to_string(strategy) << ": " << result.iterations << " iterations, "
           << (result.converged ? "converged" : "not converged") << ", objective " << format_double(last.total)
           << " (fit " << format_double(last.fit) << ", sparsity " << format_double(last.sparsity) << ", graph "
           << format_double(last.graph) << ") -> " << out_dir.string() << '\n';
}

void cmd_evaluate(const Context& ctx, const fs::path& result_dir, const fs::path& data_dir,
                  const fs::path& activations_dir, const fs::path& out_path) {
  const auto loaded = read_result(result_dir);
  const auto& result = loaded.result;
  const auto cohort = read_cohort(data_dir).cohort;
  const auto ids = subject_ids(cohort);
  if (result.stacks.size() != ids.size()) throw DataError("evaluate: result and cohort differ in subject count");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (result.stacks[i].subject_id != ids[i]) {
      throw DataError("evaluate: result subject '" + result.stacks[i].subject_id + "' does not match cohort subject '" +
                      ids[i] + "'");
    }
  }
  const auto acts = read_activations(activations_dir, ids, cohort.S(), ctx.config.evaluate.events.value_or(fs::path{}));

  const int h = result.spec.h();
  std::vector<std::pair<std::string, std::vector<int>>> sets;
  for (int j = 0; j < h; ++j) sets.push_back({"scale_" + std::to_string(j + 1), {j}});
  std::vector<int> multi;
  if (ctx.config.evaluate.scales_used.empty()) {
    for (int j = 0; j < h; ++j) multi.push_back(j);
  } else {
    for (int j : ctx.config.evaluate.scales_used) {
      if (j < 1 || j > h) throw ConfigError("evaluate: scales_used entry " + std::to_string(j) + " outside 1.." + std::to_string(h));
      multi.push_back(j - 1);
    }
  }
  sets.push_back({"multi", multi});

  json report;
  report["format"] = kReportFormat;
  report["strategy"] = std::string(to_string(result.strategy));
  report["K"] = result.spec.K;
  report["subjects"] = ids;
  report["events"] = acts.events;
  report["feature_order"] = "scale-ascending";
  json rows = json::array();
  json aggregates = json::object();
  json feature_sets = json::array();
  std::set<int> empty_parcels;
  std::map<std::string, Vector> per_subject;
  for (const auto& [name, scales] : sets) {
    const auto rep = loso_evaluate(cohort, result, acts.maps, acts.events, scales, ctx.threads);
    empty_parcels.insert(rep.empty_parcels.begin(), rep.empty_parcels.end());
    json fs_entry;
    fs_entry["name"] = name;
    fs_entry["scales"] = one_based(rep.scales_used);
    feature_sets.push_back(fs_entry);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t e = 0; e < acts.events.size(); ++e) {
        json row;
        row["subject"] = ids[i];
        row["event"] = acts.events[e];
        row["feature_set"] = name;
        row["r"] = rep.r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(e));
        row["degenerate"] = static_cast<bool>(rep.degenerate[i][e]);
        rows.push_back(row);
      }
    }
    const Vector ps = rep.per_subject_mean();
    json agg;
    agg["mean_r"] = rep.mean_r();
    json subj = json::object();
    for (std::size_t i = 0; i < ids.size(); ++i) subj[ids[i]] = ps[static_cast<Eigen::Index>(i)];
    agg["per_subject_mean_r"] = subj;
    aggregates[name] = agg;
    per_subject[name] = ps;
  }
  report["feature_sets"] = feature_sets;
  report["rows"] = rows;
  report["aggregates"] = aggregates;

  json tests = json::array();
  const Vector& m = per_subject.at("multi");
  for (int j = 0; j < h; ++j) {
    const std::string name = "scale_" + std::to_string(j + 1);
    const Vector& s = per_subject.at(name);
    json t;
    t["a"] = "multi";
    t["b"] = name;
    t.update(wilcoxon_json(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())),
                           std::span<const double>(s.data(), static_cast<std::size_t>(s.size()))));
    tests.push_back(t);
  }
  report["tests"] = tests;
  report["empty_parcels"] = std::vector<int>(empty_parcels.begin(), empty_parcels.end());
  write_text(out_path, report.dump(2) + "\n");

  auto& o = say(ctx);
  o << "evaluated " << ids.size() << " subjects x " << acts.events.size() << " events -> " << out_path.string() << '\n';
  for (const auto& [name, scales] : sets) o << "  " << name << " mean r " << format_double(aggregates[name]["mean_r"].get<double>()) << '\n';
}

void cmd_compare(const Context& ctx, const std::vector<fs::path>& reports, const fs::path& out_path,
                 const std::string& feature_set) {
  if (reports.size() < 2) throw ConfigError("compare: at least two reports are required");
  struct Loaded {
    std::string label;
    std::vector<std::string> subjects;
    std::set<std::pair<std::string, std::string>> keys;
    std::vector<double> per_subject;
    double mean_r = 0.0;
  };
  std::vector<Loaded> runs;
  for (const auto& path : reports) {
    const json j = read_json(path);
    if (j.value("format", "") != kReportFormat) throw FormatError(path.string() + ": not an evaluation report");
    Loaded l;
    l.label = j.at("strategy").get<std::string>();
    l.subjects = j.at("subjects").get<std::vector<std::string>>();
    std::map<std::string, std::pair<double, int>> sums;
    double total = 0.0;
    int count = 0;
    for (const auto& row : j.at("rows")) {
      if (row.at("feature_set").get<std::string>() != feature_set) continue;
      const auto subject = row.at("subject").get<std::string>();
      l.keys.insert({subject, row.at("event").get<std::string>()});
      const double r = row.at("r").get<double>();
      sums[subject].first += r;
      sums[subject].second += 1;
      total += r;
      ++count;
    }
    if (count == 0) throw DataError(path.string() + ": no rows for feature set '" + feature_set + "'");
    for (const auto& s : l.subjects) {
      const auto it = sums.find(s);
      if (it == sums.end()) throw DataError(path.string() + ": subject '" + s + "' has no rows");
      l.per_subject.push_back(it->second.first / it->second.second);
    }
    l.mean_r = total / count;
    runs.push_back(std::move(l));
  }
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].keys != runs[0].keys || runs[r].subjects != runs[0].subjects) {
      throw DataError("compare: '" + reports[r].string() + "' and '" + reports[0].string() +
                      "' do not cover the same (subject, event) pairs");
    }
  }

  json out;
  out["format"] = kCompareFormat;
  out["feature_set"] = feature_set;
  json list = json::array();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    json e;
    e["report"] = reports[r].string();
    e["label"] = runs[r].label;
    e["mean_r"] = runs[r].mean_r;
    e["per_subject_mean_r"] = runs[r].per_subject;
    list.push_back(e);
  }
  out["reports"] = list;
  json table = json::array();
  for (const auto& a : runs) {
    json row = json::array();
    for (const auto& b : runs) row.push_back(wilcoxon_json(a.per_subject, b.per_subject));
    table.push_back(row);
  }
  out["wilcoxon"] = table;
  write_text(out_path, out.dump(2) + "\n");

  auto& o = say(ctx);
  o << "feature set " << feature_set << '\n';
  for (std::size_t r = 0; r < runs.size(); ++r) {
    o << "[" << r << "] " << runs[r].label << " mean r " << format_double(runs[r].mean_r) << "  p:";
    for (std::size_t c = 0; c < runs.size(); ++c) {
      const auto& p = table[r][c]["p"];
      o << ' ' << (p.is_null() ? std::string("n/a") : format_double(p.get<double>()));
    }
    o << '\n';
  }
}

void cmd_export_maps(const Context& ctx, const fs::path& result_dir, int scale, const fs::path& out_dir,
                     MapFormat format) {
  const auto loaded = read_result(result_dir);
  const auto& result = loaded.result;
  if (scale < 1 || scale > result.spec.h()) {
    throw ConfigError("export-maps: scale " + std::to_string(scale) + " outside 1.." + std::to_string(result.spec.h()));
  }
  if (format == MapFormat::pgm && !loaded.grid) {
    throw ConfigError("export-maps: pgm output needs grid_rows/grid_cols in result.meta");
  }
  Matrix mean = result.stacks.front().scale_map(scale - 1);
  for (std::size_t i = 1; i < result.stacks.size(); ++i) mean += result.stacks[i].scale_map(scale - 1);
  mean /= static_cast<double>(result.stacks.size());

  fs::create_directories(out_dir);
  const std::string stem = "scale" + std::to_string(scale);
  std::vector<int> dead;
  for (Eigen::Index k = 0; k < mean.rows(); ++k) {
    if ((mean.row(k).array() == 0.0).all()) dead.push_back(static_cast<int>(k));
  }
  std::vector<std::string> files;
  if (format == MapFormat::csv) {
    std::string text;
    for (Eigen::Index k = 0; k < mean.rows(); ++k) {
      for (Eigen::Index s = 0; s < mean.cols(); ++s) {
        if (s) text.push_back(',');
        text += format_double(mean(k, s));
      }
      text.push_back('\n');
    }
    files.push_back(stem + ".csv");
    write_text(out_dir / files.back(), text);
  } else {
    const auto& g = *loaded.grid;
    if (g.rows * g.cols != static_cast<std::size_t>(mean.cols())) {
      throw DataError("export-maps: grid " + std::to_string(g.rows) + "x" + std::to_string(g.cols) +
                      " does not match " + std::to_string(mean.cols()) + " voxels");
    }
    for (Eigen::Index k = 0; k < mean.rows(); ++k) {
      const double top = mean.row(k).maxCoeff();
      std::string img = "P5\n" + std::to_string(g.cols) + " " + std::to_string(g.rows) + "\n255\n";
      for (Eigen::Index s = 0; s < mean.cols(); ++s) {
        const double v = top > 0.0 ? std::clamp(mean(k, s) / top, 0.0, 1.0) : 0.0;
        img.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * v))));
      }
      files.push_back(stem + "_component" + std::to_string(k + 1) + ".pgm");
      write_text(out_dir / files.back(), img);
    }
  }
  MetaFile meta;
  meta.set("scale", std::to_string(scale));
  meta.set("K", std::to_string(mean.rows()));
  meta.set("format", format == MapFormat::csv ? "csv" : "pgm");
  meta.set("subjects", std::to_string(result.stacks.size()));
  meta.set("dead_components", join_ints(one_based(dead)));
  std::string names;
  for (const auto& f : files) names += (names.empty() ? "" : ",") + f;
  meta.set("files", names);
  meta.write(out_dir / (stem + ".meta"));
  say(ctx) << "exported " << mean.rows() << " scale-" << scale << " maps (" << dead.size() << " dead) -> "
           << out_dir.string() << '\n';
}

}  // namespace hdmf::cli
