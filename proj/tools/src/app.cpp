#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "hdmf/error.hpp"
#include "hdmf/parallel.hpp"
#include "hdmf_cli/commands.hpp"

namespace hdmf::cli {
namespace {

unsigned threads_from_env() {
  const char* env = std::getenv("HIER_DMF_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const unsigned long v = std::strtoul(env, &end, 10);
  if (*end != '\0') throw ConfigError(std::string("HIER_DMF_THREADS: expected a count, got '") + env + "'");
  return static_cast<unsigned>(v);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Collaborative deep semi-NMF: multi-scale hierarchical component maps", "hier_dmf"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool quiet = false;
  app.add_option("--config", config_path, "Run configuration file");
  app.add_option("--seed", seed, "Override [hierarchy] seed");
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
  app.add_flag("--quiet", quiet, "Suppress summary output");

  auto* simulate = app.add_subcommand("simulate", "Write a synthetic cohort with known hierarchy");
  std::string sim_out;
  simulate->add_option("--out", sim_out, "Output cohort directory")->required();

  auto* decompose = app.add_subcommand("decompose", "Decompose a cohort");
  std::string dec_data, dec_out, dec_strategy = "joint";
  decompose->add_option("--data", dec_data, "Cohort directory (default [data] cohort_dir)");
  decompose->add_option("--strategy", dec_strategy, "joint, independent or greedy");
  decompose->add_option("--out", dec_out, "Result directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Leave-one-subject-out activation prediction");
  std::string ev_result, ev_data, ev_acts, ev_out;
  evaluate->add_option("--result", ev_result, "Result directory")->required();
  evaluate->add_option("--data", ev_data, "Cohort directory (default [data] cohort_dir)");
  evaluate->add_option("--activations", ev_acts, "Activation directory (default [data] activations_dir)");
  evaluate->add_option("--out", ev_out, "report.json path")->required();

  auto* compare = app.add_subcommand("compare", "Paired comparison of evaluation reports");
  std::vector<std::string> cmp_reports;
  std::string cmp_out, cmp_set = "multi";
  compare->add_option("reports", cmp_reports, "report.json files")->required();
  compare->add_option("--out", cmp_out, "Comparison JSON path")->required();
  compare->add_option("--feature-set", cmp_set, "Feature set to compare");

  auto* exporter = app.add_subcommand("export-maps", "Export mean-over-subjects maps of one scale");
  std::string exp_result, exp_out, exp_format = "csv";
  int exp_scale = 1;
  exporter->add_option("--result", exp_result, "Result directory")->required();
  exporter->add_option("--scale", exp_scale, "1-based scale")->required();
  exporter->add_option("--out", exp_out, "Output directory")->required();
  exporter->add_option("--format", exp_format, "csv or pgm")->check(CLI::IsMember({"csv", "pgm"}));

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    Context ctx;
    ctx.config = config_path ? load_config(*config_path) : RunConfig{};
    if (seed) ctx.config.spec.seed = *seed;
    ctx.threads = resolve_threads(threads ? *threads : threads_from_env());
    ctx.quiet = quiet;
    ctx.out = &out;

    auto data_dir = [&](const std::string& flag) -> fs::path {
      if (!flag.empty()) return flag;
      if (ctx.config.cohort_dir) return *ctx.config.cohort_dir;
      throw ConfigError("no cohort directory: pass --data or set [data] cohort_dir");
    };

    if (simulate->parsed()) {
      cmd_simulate(ctx, sim_out);
    } else if (decompose->parsed()) {
      cmd_decompose(ctx, data_dir(dec_data), parse_strategy(dec_strategy), dec_out);
    } else if (evaluate->parsed()) {
      fs::path acts = ev_acts;
      if (acts.empty()) {
        if (!ctx.config.activations_dir) throw ConfigError("no activation directory: pass --activations or set [data] activations_dir");
        acts = *ctx.config.activations_dir;
      }
      cmd_evaluate(ctx, ev_result, data_dir(ev_data), acts, ev_out);
    } else if (compare->parsed()) {
      std::vector<fs::path> paths(cmp_reports.begin(), cmp_reports.end());
      cmd_compare(ctx, paths, cmp_out, cmp_set);
    } else if (exporter->parsed()) {
      cmd_export_maps(ctx, exp_result, exp_scale, exp_out, exp_format == "pgm" ? MapFormat::pgm : MapFormat::csv);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hdmf::cli
