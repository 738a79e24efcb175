#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hdmf/activations.hpp"
#include "hdmf/error.hpp"
#include "hdmf/evaluation.hpp"
#include "hdmf/result_io.hpp"
#include "hdmf_cli/commands.hpp"
#include "oracles.hpp"

using namespace hdmf;
using json = nlohmann::ordered_json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hdmf_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  std::ofstream(dir / "run.cfg") << text;
  return dir / "run.cfg";
}

std::string small_config(const std::string& K = "6,3,2", std::size_t n = 3) {
  std::ostringstream s;
  s << "[hierarchy]\nK = " << K << "\nseed = 5\nmax_outer_iters = 12\npretrain_iters = 60\n"
    << "[simulate]\ngrid = 6x8\nn = " << n << "\nT = 40\nnoise_sigma = 0.1\nsubject_jitter = 0.1\n";
  return s.str();
}

json load_json(const fs::path& p) { return json::parse(oracle::slurp(p)); }

json fake_report(const std::vector<double>& per_subject, const std::string& label) {
  json r;
  r["format"] = "hdmf-report-1";
  r["strategy"] = label;
  std::vector<std::string> subjects;
  json rows = json::array();
  for (std::size_t i = 0; i < per_subject.size(); ++i) {
    subjects.push_back("s" + std::to_string(i));
    for (const char* ev : {"e1", "e2"}) {
      json row;
      row["subject"] = subjects.back();
      row["event"] = ev;
      row["feature_set"] = "multi";
      row["r"] = per_subject[i];
      rows.push_back(row);
    }
  }
  r["subjects"] = subjects;
  r["rows"] = rows;
  return r;
}

}  // namespace

TEST(Config, ParsesSectionsAndRejectsUnknownKeys) {
  auto cfg = cli::parse_config(
      "# comment\n[data]\ncohort_dir = cohort\n[hierarchy]\nh = 2\nK = 10, 5 ; trailing\nalpha = 0.5\n"
      "backtracking = false\n[simulate]\ngrid = 4x9\nevents = 3\n[evaluate]\nscales_used = 1,2\n",
      "/base");
  EXPECT_EQ(cfg.spec.K, (std::vector<int>{10, 5}));
  EXPECT_EQ(cfg.spec.alpha, 0.5);
  EXPECT_FALSE(cfg.spec.backtracking);
  EXPECT_EQ(*cfg.cohort_dir, fs::path("/base/cohort"));
  EXPECT_EQ(cfg.simulate.grid.cols, 9u);
  EXPECT_EQ(cfg.simulate.events, 3u);
  EXPECT_EQ(cfg.evaluate.scales_used, (std::vector<int>{1, 2}));

  auto message = [](const std::string& text) {
    try {
      cli::parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("[hierarchy]\nK = 4,2\ngamma = 1\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("[plot]\n").find("unknown section"), std::string::npos);
  EXPECT_NE(message("[hierarchy]\nh = 3\nK = 4,2\n").find("h = 3"), std::string::npos);
  EXPECT_NE(message("[hierarchy]\nK = 2,4\n").find("decreasing"), std::string::npos);
  EXPECT_NE(message("[simulate]\ngrid = 6by6\n").find("grid"), std::string::npos);
  EXPECT_NE(message("K = 3\n").find("outside of a section"), std::string::npos);
  EXPECT_THROW(cli::RunConfig{}.hierarchy(), ConfigError);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"simulate"}).code, 2);  // --out missing
  auto dir = workdir("usage");
  auto cfg = write_config(dir, small_config());
  auto r = run_cli({"--config", cfg.string(), "decompose", "--data", dir.string(), "--strategy", "deep", "--out", (dir / "r").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("deep"), std::string::npos);
  EXPECT_EQ(run_cli({"--config", (dir / "missing.cfg").string(), "simulate", "--out", dir.string()}).code, 2);
}

TEST(Cli, SimulateContractAndDeterminism) {
  auto dir = workdir("simulate");
  auto cfg = write_config(dir, "[hierarchy]\nK = 4,2\n[simulate]\nn = 2\ngrid = 6x6\n");
  ASSERT_EQ(run_cli({"--config", cfg.string(), "--quiet", "simulate", "--out", (dir / "a").string()}).code, 0);
  auto r = run_cli({"--config", cfg.string(), "simulate", "--out", (dir / "b").string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("simulated n=2"), std::string::npos);
  int subjects = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) subjects += e.path().filename().string().starts_with("subject_");
  EXPECT_EQ(subjects, 2);
  EXPECT_TRUE(fs::exists(dir / "a" / "graph.edges"));
  EXPECT_TRUE(fs::exists(dir / "a" / "cohort.meta"));
  EXPECT_TRUE(fs::exists(dir / "a" / "truth" / "truth.meta"));
  EXPECT_EQ(oracle::tree_bytes(dir / "a"), oracle::tree_bytes(dir / "b"));

  auto tiny = write_config(dir, "[hierarchy]\nK = 4,2\n[simulate]\ngrid = 3x3\n");
  auto bad = run_cli({"--config", tiny.string(), "simulate", "--out", (dir / "c").string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("too small"), std::string::npos);
}

TEST(Cli, DecomposeWritesMonotoneTrace) {
  auto dir = workdir("decompose");
  auto cfg = write_config(dir, small_config()).string();
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", (dir / "cohort").string()}).code, 0);
  auto r = run_cli({"--config", cfg, "decompose", "--data", (dir / "cohort").string(), "--out", (dir / "res").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("joint:"), std::string::npos);
  std::ifstream trace(dir / "res" / "trace.csv");
  std::string line;
  std::getline(trace, line);
  EXPECT_EQ(line, "iter,fit,sparsity,graph,total");
  double prev = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(trace, line)) {
    const double total = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LE(total, prev * (1 + 1e-6)) << line;
    prev = total;
    ++rows;
  }
  EXPECT_GE(rows, 2);
  EXPECT_TRUE(fs::exists(dir / "res" / "Vt_002_3.dmat"));
  EXPECT_TRUE(fs::exists(dir / "res" / "U_000_1.dmat"));

  // The cohort can also come from [data] cohort_dir.
  auto with_data = write_config(dir / "cohort", "[data]\ncohort_dir = .\n" + small_config());
  EXPECT_EQ(run_cli({"--config", with_data.string(), "--quiet", "decompose", "--out", (dir / "res2").string()}).code, 0);
  EXPECT_EQ(oracle::tree_bytes(dir / "res"), oracle::tree_bytes(dir / "res2"));
  EXPECT_EQ(run_cli({"--config", cfg, "decompose", "--data", (dir / "nowhere").string(), "--out", (dir / "x").string()}).code, 1);
}

TEST(Cli, SingleScaleJointEqualsIndependent) {
  auto dir = workdir("h1");
  auto cfg = write_config(dir, small_config("5")).string();
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", (dir / "cohort").string()}).code, 0);
  for (const char* s : {"joint", "independent"})
    ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", (dir / "cohort").string(), "--strategy", s, "--out",
                   (dir / s).string()})
                  .code,
              0);
  auto a = oracle::tree_bytes(dir / "joint"), b = oracle::tree_bytes(dir / "independent");
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) {
    if (name == "result.meta") continue;
    EXPECT_EQ(bytes, b.at(name)) << name;
  }
}

TEST(Cli, EvaluateLinearActivationsAndCompare) {
  auto dir = workdir("evaluate");
  auto cfg = write_config(dir, small_config("6,3,2", 4)).string();
  const auto cohort_dir = dir / "cohort";
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", cohort_dir.string()}).code, 0);
  for (const char* s : {"joint", "independent", "greedy"})
    ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", cohort_dir.string(), "--strategy", s, "--out",
                   (dir / s).string()})
                  .code,
              0);

  // Activations linear in the joint result's multi-scale features with
  // parcel-wise coefficients.
  const auto cohort = read_cohort(cohort_dir).cohort;
  const auto result = read_result(dir / "joint").result;
  const auto parcels = parcellate(group_mean_finest(result));
  std::mt19937_64 rng(3);
  const Matrix coef = oracle::random_matrix(parcels.parcel_count, 12, rng);
  ActivationSet set;
  set.events = {"task"};
  std::vector<std::string> ids;
  const std::vector<int> all{0, 1, 2};
  for (std::size_t i = 0; i < cohort.n(); ++i) {
    ids.push_back(cohort.subjects[i].subject_id);
    const Matrix F = fc_features(result.stacks[i], cohort.subjects[i].data, all);
    Matrix a(1, F.cols());
    for (Eigen::Index s = 0; s < F.cols(); ++s) {
      const int p = parcels.parcel[static_cast<std::size_t>(s)];
      a(0, s) = coef.row(p).head(11).dot(F.col(s)) + coef(p, 11);
    }
    set.maps.push_back(a);
  }
  write_activations(set, ids, dir / "acts");

  auto r = run_cli({"--config", cfg, "evaluate", "--result", (dir / "joint").string(), "--data", cohort_dir.string(),
                "--activations", (dir / "acts").string(), "--out", (dir / "joint.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = load_json(dir / "joint.json");
  EXPECT_EQ(rep["format"], "hdmf-report-1");
  EXPECT_EQ(rep["feature_sets"].size(), 4u);
  int multi_rows = 0;
  for (const auto& row : rep["rows"]) {
    if (row["feature_set"] != "multi") continue;
    ++multi_rows;
    EXPECT_GE(row["r"].get<double>(), 0.99) << row.dump();
  }
  EXPECT_EQ(multi_rows, 4);
  EXPECT_EQ(rep["tests"].size(), 3u);

  for (const char* s : {"independent", "greedy"})
    ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "evaluate", "--result", (dir / s).string(), "--data", cohort_dir.string(),
                   "--activations", (dir / "acts").string(), "--out", (dir / (std::string(s) + ".json")).string()})
                  .code,
              0);
  auto cmp = run_cli({"compare", (dir / "joint.json").string(), (dir / "independent.json").string(),
                  (dir / "greedy.json").string(), "--out", (dir / "cmp.json").string()});
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  const auto table = load_json(dir / "cmp.json");
  ASSERT_EQ(table["wilcoxon"].size(), 3u);
  for (const auto& row : table["wilcoxon"]) EXPECT_EQ(row.size(), 3u);
  EXPECT_EQ(table["reports"][2]["label"], "greedy");

  // Missing activation file is named.
  fs::remove(dir / "acts" / ("act_" + ids[2] + "_task.dmat"));
  auto missing = run_cli({"--config", cfg, "evaluate", "--result", (dir / "joint").string(), "--data", cohort_dir.string(),
                      "--activations", (dir / "acts").string(), "--out", (dir / "x.json").string()});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("act_" + ids[2] + "_task.dmat"), std::string::npos);
}

TEST(Cli, EvaluateTwoSubjects) {
  auto dir = workdir("eval2");
  auto text = small_config("4,2", 2) + "events = 2\n";
  auto cfg = write_config(dir, text).string();
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", (dir / "c").string()}).code, 0);
  ASSERT_TRUE(fs::exists(dir / "c" / "activations" / "events.meta"));
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", (dir / "c").string(), "--out", (dir / "r").string()}).code, 0);
  auto r = run_cli({"--config", cfg, "evaluate", "--result", (dir / "r").string(), "--data", (dir / "c").string(),
                "--activations", (dir / "c" / "activations").string(), "--out", (dir / "rep.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = load_json(dir / "rep.json");
  EXPECT_EQ(rep["subjects"].size(), 2u);
  EXPECT_EQ(rep["rows"].size(), 2u * 2u * 3u);
  for (const auto& t : rep["tests"]) EXPECT_TRUE(t["p"].is_null());  // fewer than 5 pairs
}

TEST(Cli, CompareExtremeCases) {
  auto dir = workdir("compare");
  const std::vector<double> base{0.1, 0.3, 0.2, 0.5, 0.4, 0.6};
  std::vector<double> shifted = base;
  for (auto& v : shifted) v += 0.05;
  std::ofstream(dir / "a.json") << fake_report(base, "a").dump();
  std::ofstream(dir / "b.json") << fake_report(shifted, "b").dump();

  ASSERT_EQ(run_cli({"--quiet", "compare", (dir / "a.json").string(), (dir / "a.json").string(), "--out", (dir / "self.json").string()}).code, 0);
  const auto self = load_json(dir / "self.json");
  EXPECT_EQ(self["wilcoxon"][0][1]["p"], 1.0);
  EXPECT_EQ(self["wilcoxon"][0][1]["all_zero"], true);

  ASSERT_EQ(run_cli({"--quiet", "compare", (dir / "a.json").string(), (dir / "b.json").string(), "--out", (dir / "ab.json").string()}).code, 0);
  const auto ab = load_json(dir / "ab.json");
  EXPECT_EQ(ab["wilcoxon"][0][1]["p"].get<double>(), 0.03125);
  EXPECT_EQ(ab["wilcoxon"][1][0]["p"].get<double>(), 0.03125);

  std::ofstream(dir / "short.json") << fake_report({0.1, 0.2, 0.3, 0.4, 0.5}, "c").dump();
  auto mismatch = run_cli({"compare", (dir / "a.json").string(), (dir / "short.json").string(), "--out", (dir / "m.json").string()});
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_EQ(run_cli({"compare", (dir / "a.json").string(), "--out", (dir / "one.json").string()}).code, 2);
}

TEST(Cli, ExportMaps) {
  auto dir = workdir("export");
  auto cfg = write_config(dir, small_config()).string();
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", (dir / "c").string()}).code, 0);
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", (dir / "c").string(), "--out", (dir / "r").string()}).code, 0);
  const auto before = oracle::tree_bytes(dir / "r");

  ASSERT_EQ(run_cli({"--quiet", "export-maps", "--result", (dir / "r").string(), "--scale", "3", "--format", "pgm", "--out",
                 (dir / "pgm").string()})
                .code,
            0);
  int pgm = 0;
  for (const auto& e : fs::directory_iterator(dir / "pgm")) pgm += e.path().extension() == ".pgm";
  EXPECT_EQ(pgm, 2);
  EXPECT_EQ(oracle::slurp(dir / "pgm" / "scale3_component1.pgm").substr(0, 3), "P5\n");

  ASSERT_EQ(run_cli({"--quiet", "export-maps", "--result", (dir / "r").string(), "--scale", "2", "--out", (dir / "csv").string()}).code, 0);
  const auto loaded = read_result(dir / "r").result;
  Matrix mean = Matrix::Zero(3, 48);
  for (const auto& st : loaded.stacks) mean += st.scale_map(1);
  mean /= static_cast<double>(loaded.stacks.size());
  std::ifstream csv(dir / "csv" / "scale2.csv");
  std::string line;
  Eigen::Index k = 0;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index s = 0;
    while (std::getline(ss, cell, ',')) EXPECT_NEAR(std::stod(cell), mean(k, s++), 1e-12);
    EXPECT_EQ(s, 48);
    ++k;
  }
  EXPECT_EQ(k, 3);

  // Exporting leaves the stored factors untouched, and they reload exactly.
  EXPECT_EQ(oracle::tree_bytes(dir / "r"), before);
  write_result(loaded, dir / "rewritten", read_result(dir / "r").grid);
  EXPECT_EQ(oracle::tree_bytes(dir / "rewritten"), before);

  EXPECT_EQ(run_cli({"export-maps", "--result", (dir / "r").string(), "--scale", "4", "--out", (dir / "bad").string()}).code, 2);
  EXPECT_EQ(run_cli({"export-maps", "--result", (dir / "r").string(), "--scale", "1", "--format", "png", "--out", (dir / "bad").string()}).code, 2);
}

TEST(Cli, ExportNotesDeadComponentsAndNeedsGrid) {
  auto dir = workdir("dead");
  DecompositionResult r;
  r.spec.K = {3};
  for (int i = 0; i < 2; ++i) {
    FactorStack st;
    st.subject_id = "s" + std::to_string(i);
    Matrix V = Matrix::Identity(3, 4);
    V.row(1).setZero();
    st.Vt = {V};
    st.U = {Matrix::Ones(5, 3)};
    r.stacks.push_back(st);
  }
  r.objective_trace = {ObjectiveBreakdown{}};
  r.dead_components = {{1}};
  write_result(r, dir / "r");
  ASSERT_EQ(run_cli({"--quiet", "export-maps", "--result", (dir / "r").string(), "--scale", "1", "--out", (dir / "o").string()}).code, 0);
  const auto meta = MetaFile::read(dir / "o" / "scale1.meta");
  EXPECT_EQ(meta.require("dead_components"), "2");
  EXPECT_EQ(meta.require("files"), "scale1.csv");
  auto pgm = run_cli({"export-maps", "--result", (dir / "r").string(), "--scale", "1", "--format", "pgm", "--out", (dir / "p").string()});
  EXPECT_EQ(pgm.code, 2);
  EXPECT_NE(pgm.err.find("grid"), std::string::npos);
}

TEST(Cli, ThreadsFromEnvironment) {
  auto dir = workdir("threads");
  auto cfg = write_config(dir, small_config("4,2", 4)).string();
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "simulate", "--out", (dir / "c").string()}).code, 0);
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "--threads", "1", "decompose", "--data", (dir / "c").string(), "--out",
                 (dir / "one").string()})
                .code,
            0);
  ::setenv("HIER_DMF_THREADS", "4", 1);
  ASSERT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", (dir / "c").string(), "--out", (dir / "env").string()}).code, 0);
  ::setenv("HIER_DMF_THREADS", "lots", 1);
  EXPECT_EQ(run_cli({"--config", cfg, "--quiet", "decompose", "--data", (dir / "c").string(), "--out", (dir / "bad").string()}).code, 2);
  ::unsetenv("HIER_DMF_THREADS");
  EXPECT_EQ(oracle::tree_bytes(dir / "one"), oracle::tree_bytes(dir / "env"));
}
