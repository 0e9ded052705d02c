#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dspg/config.hpp"
#include "dspg/sweep.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  bool verbose = false;
  int parallel = 1;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (overrides output_path)");
  cmd->add_flag("--verbose", args.verbose, "also write per-trial finals, traces and deliveries");
  cmd->add_option("--parallel", args.parallel, "worker threads for sweep trials")
      ->check(CLI::PositiveNumber);
}

dspg::SweepOptions make_options(const CommonArgs& args, const dspg::ExperimentConfig& cfg) {
  dspg::SweepOptions options;
  options.out_dir = args.out_dir.empty() ? cfg.output_path : args.out_dir;
  options.verbose = args.verbose;
  options.parallel = args.parallel;
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DSPG simulator: decentralized two-measurement gradient descent "
               "over erasure channels"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, diag_args;
  CLI::App* run_cmd = app.add_subcommand("run", "single simulation; writes trace.csv, final.csv");
  attach_common(run_cmd, run_args);
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "c x p_c grid with trial averaging; writes summary.csv");
  attach_common(sweep_cmd, sweep_args);
  CLI::App* diag_cmd =
      app.add_subcommand("diagnose", "estimator bias/variance tables; writes diagnostics.csv");
  attach_common(diag_cmd, diag_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto cfg = dspg::load_config_file(run_args.config_path);
      if (cfg.c_values.size() != 1 || cfg.p_values.size() != 1) {
        fmt::print(stderr, "run wants a single (c, p_c) cell; use the sweep subcommand for "
                           "lists\n");
        return 1;
      }
      if (cfg.mode == dspg::RunMode::kDiagnostics) {
        fmt::print(stderr, "diagnostics configs go through the diagnose subcommand\n");
        return 1;
      }
      const auto options = make_options(run_args, cfg);
      const auto result = dspg::run_single(cfg, options);
      fmt::print("final_norm={} status={} outputs={}\n", result.final_estimate.norm(),
                 result.status == dspg::RunStatus::kOk ? "ok" : "diverged",
                 options.out_dir.string());
      return 0;
    }
    if (sweep_cmd->parsed()) {
      const auto cfg = dspg::load_config_file(sweep_args.config_path);
      if (cfg.mode == dspg::RunMode::kDiagnostics) {
        fmt::print(stderr, "diagnostics configs go through the diagnose subcommand\n");
        return 1;
      }
      const auto options = make_options(sweep_args, cfg);
      const auto summary = dspg::run_sweep(cfg, options);
      for (const auto& row : summary.rows) {
        fmt::print("c={} p_c={} mean_final_norm={} diverged={}/{}\n", row.c, row.p_c,
                   row.mean_final_norm, row.diverged_count, row.trials);
      }
      fmt::print("summary: {}\n", (options.out_dir / "summary.csv").string());
      if (summary.any_cell_all_diverged()) {
        fmt::print(stderr, "at least one grid cell had every trial diverge\n");
        return 2;
      }
      return 0;
    }
    // diagnose
    const auto cfg = dspg::load_config_file(diag_args.config_path);
    if (cfg.mode != dspg::RunMode::kDiagnostics) {
      fmt::print(stderr, "diagnose wants mode = diagnostics\n");
      return 1;
    }
    const auto options = make_options(diag_args, cfg);
    dspg::run_diagnostics(cfg, options);
    fmt::print("diagnostics: {}\n", (options.out_dir / "diagnostics.csv").string());
    return 0;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
