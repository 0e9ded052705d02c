#include "dspg/sweep.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "dspg/consensus.hpp"
#include "dspg/estimator.hpp"

namespace dspg {

bool SweepSummary::any_cell_all_diverged() const {
  for (const SweepRow& row : rows) {
    if (row.trials > 0 && row.diverged_count == row.trials) return true;
  }
  return false;
}

std::uint64_t trial_seed(const ExperimentConfig& config, int trial_index) {
  return derive_seed(config.master_seed, stream::kTrial,
                     static_cast<std::uint64_t>(trial_index));
}

namespace {

ObjectiveSet build_objective(const ExperimentConfig& config, std::uint64_t fallback_seed) {
  switch (config.objective.kind) {
    case ObjectiveKind::kQuartic1d:
      return make_quartic_1d();
    case ObjectiveKind::kQuadraticRandom:
    default: {
      const std::uint64_t seed = config.objective.seed.value_or(fallback_seed);
      if (config.objective.x_star) {
        return make_quadratic_set(config.d, seed, *config.objective.x_star).to_objective_set();
      }
      return make_quadratic_set(config.d, seed).to_objective_set();
    }
  }
}

}  // namespace

SimulationParams cell_params(const ExperimentConfig& config, double c, double p_c,
                             int trial_index) {
  const std::uint64_t seed = trial_seed(config, trial_index);
  SimulationParams params;
  // One objective family per experiment: the problem instance is part of the
  // experiment definition, trials rerun it with fresh run randomness.
  params.objectives = build_objective(config, derive_seed(config.master_seed, stream::kObjective));
  params.c = SimulationParams::common_c(config.d, c);
  params.channel.p_success = p_c;
  params.channel.mode = config.delay_mode;
  params.channel.max_queue_delay = config.max_queue_delay;
  params.channel.overrides = config.p_overrides;
  params.activation = config.activation;
  params.schedule = config.schedule;
  params.iterations = config.iterations;
  params.master_seed = seed;
  params.subsample_stride = config.subsample_stride;
  params.init = config.init;
  return params;
}

namespace {

struct TrialOutcome {
  double final_norm = 0.0;
  RunStatus status = RunStatus::kOk;
  Vector final_coords;
  Trace trace;
};

TrialOutcome execute_trial(const ExperimentConfig& config, double c, double p_c,
                           int trial_index, bool keep_trace) {
  SimulationParams params = cell_params(config, c, p_c, trial_index);
  if (!keep_trace) {
    // Only the final state is consumed; record as little as possible.
    params.subsample_stride =
        static_cast<int>(std::min<std::int64_t>(std::max<std::int64_t>(params.iterations, 1),
                                                1 << 30));
  }
  SimulationResult result;
  if (config.mode == RunMode::kConsensus) {
    ConsensusParams cparams;
    cparams.base = std::move(params);
    result = run_consensus(cparams);
  } else {
    result = run_simulation(params);
  }
  TrialOutcome outcome;
  outcome.final_norm = result.final_estimate.norm();
  outcome.status = result.status;
  outcome.final_coords = std::move(result.final_estimate);
  if (keep_trace) {
    outcome.trace = std::move(result.trace);
  }
  return outcome;
}

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  }
  const auto probe = dir / ".write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out) {
      throw Error("output directory is not writable: " + dir.string());
    }
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace

SweepSummary run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  if (config.mode == RunMode::kDiagnostics) {
    throw Error("diagnostics configs run through run_diagnostics, not run_sweep");
  }
  if (options.write_files) {
    ensure_writable_dir(options.out_dir);
  }
  // Surface parameter problems on the calling thread before any work starts.
  cell_params(config, config.c_values.front(), config.p_values.front(), 0).validate();

  const int n_cells = static_cast<int>(config.c_values.size() * config.p_values.size());
  const int trials = config.trials;
  const int n_tasks = n_cells * trials;
  const int n_p = static_cast<int>(config.p_values.size());
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(n_tasks));

  const bool keep_traces = options.verbose && options.write_files;
  std::atomic<int> next_task{0};
  const auto worker = [&] {
    while (true) {
      const int task = next_task.fetch_add(1);
      if (task >= n_tasks) break;
      const int cell = task / trials;
      const int trial = task % trials;
      const double c = config.c_values[static_cast<std::size_t>(cell / n_p)];
      const double p_c = config.p_values[static_cast<std::size_t>(cell % n_p)];
      outcomes[static_cast<std::size_t>(task)] =
          execute_trial(config, c, p_c, trial, keep_traces);
    }
  };

  const int n_threads = std::max(1, std::min(options.parallel, n_tasks));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  SweepSummary summary;
  summary.rows.reserve(static_cast<std::size_t>(n_cells));
  summary.finals.reserve(static_cast<std::size_t>(n_tasks));
  for (int cell = 0; cell < n_cells; ++cell) {
    const double c = config.c_values[static_cast<std::size_t>(cell / n_p)];
    const double p_c = config.p_values[static_cast<std::size_t>(cell % n_p)];
    SweepRow row;
    row.c = c;
    row.p_c = p_c;
    row.trials = trials;
    double sum = 0.0, sum_sq = 0.0;
    int finished = 0;
    for (int trial = 0; trial < trials; ++trial) {
      const TrialOutcome& outcome = outcomes[static_cast<std::size_t>(cell * trials + trial)];
      FinalRow final_row;
      final_row.trial = trial;
      final_row.seed = trial_seed(config, trial);
      final_row.c = c;
      final_row.p_c = p_c;
      final_row.final_norm = outcome.final_norm;
      final_row.status = outcome.status;
      final_row.final_coords = outcome.final_coords;
      summary.finals.push_back(std::move(final_row));
      if (outcome.status == RunStatus::kOk) {
        sum += outcome.final_norm;
        sum_sq += outcome.final_norm * outcome.final_norm;
        ++finished;
      } else {
        ++row.diverged_count;
      }
    }
    if (finished > 0) {
      row.mean_final_norm = sum / finished;
      row.std_final_norm =
          finished > 1
              ? std::sqrt(std::max(0.0, (sum_sq - finished * row.mean_final_norm *
                                                      row.mean_final_norm) /
                                            (finished - 1)))
              : 0.0;
    } else {
      row.mean_final_norm = std::numeric_limits<double>::quiet_NaN();
      row.std_final_norm = std::numeric_limits<double>::quiet_NaN();
    }
    summary.rows.push_back(row);
  }

  if (options.write_files) {
    write_summary_csv(options.out_dir / "summary.csv", summary);
    if (options.verbose) {
      write_final_state_csv(options.out_dir / "finals.csv", summary.finals);
      for (int cell = 0; cell < n_cells; ++cell) {
        const double c = config.c_values[static_cast<std::size_t>(cell / n_p)];
        const double p_c = config.p_values[static_cast<std::size_t>(cell % n_p)];
        for (int trial = 0; trial < trials; ++trial) {
          const auto& trace = outcomes[static_cast<std::size_t>(cell * trials + trial)].trace;
          const auto name = fmt::format("trace_c{}_p{}_t{}.csv", format_double(c),
                                        format_double(p_c), trial);
          write_trace_csv(options.out_dir / name, trace, config.mode == RunMode::kConsensus);
        }
      }
    }
  }
  return summary;
}

void write_summary_csv(const std::filesystem::path& path, const SweepSummary& summary) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open output file for writing: " + path.string());
  }
  out << "c,p_c,mean_final_norm,std_final_norm,diverged_count,trials\n";
  for (const SweepRow& row : summary.rows) {
    out << format_double(row.c) << ',' << format_double(row.p_c) << ','
        << format_double(row.mean_final_norm) << ',' << format_double(row.std_final_norm) << ','
        << row.diverged_count << ',' << row.trials << "\n";
  }
}

SimulationResult run_single(const ExperimentConfig& config, const SweepOptions& options) {
  if (options.write_files) {
    ensure_writable_dir(options.out_dir);
  }
  SimulationParams params =
      cell_params(config, config.c_values.front(), config.p_values.front(), 0);
  params.record_deliveries = options.verbose;
  SimulationResult result;
  if (config.mode == RunMode::kConsensus) {
    ConsensusParams cparams;
    cparams.base = std::move(params);
    result = run_consensus(cparams);
  } else {
    result = run_simulation(params);
  }

  if (options.write_files) {
    write_trace_csv(options.out_dir / "trace.csv", result.trace,
                    config.mode == RunMode::kConsensus);
    FinalRow row;
    row.trial = 0;
    row.seed = trial_seed(config, 0);
    row.c = config.c_values.front();
    row.p_c = config.p_values.front();
    row.final_norm = result.final_estimate.norm();
    row.status = result.status;
    row.final_coords = result.final_estimate;
    write_final_state_csv(options.out_dir / "final.csv", {row});
    if (options.verbose) {
      write_deliveries_csv(options.out_dir / "deliveries.csv", result.deliveries);
    }
  }
  return result;
}

void run_diagnostics(const ExperimentConfig& config, const SweepOptions& options) {
  if (options.write_files) {
    ensure_writable_dir(options.out_dir);
  }
  const std::uint64_t obj_seed =
      config.objective.seed.value_or(derive_seed(config.master_seed, stream::kObjective));
  const ObjectiveSet obj = build_objective(config, obj_seed);
  const int d = obj.dimension();

  std::vector<Vector> probes;
  if (d == 1 && !config.diag_x.empty()) {
    for (double x : config.diag_x) {
      probes.push_back(Vector::Constant(1, x));
    }
  } else {
    Rng probe_rng(derive_seed(config.master_seed, stream::kDiagnostics));
    for (int p = 0; p < config.diag_probes; ++p) {
      Vector x(d);
      for (int k = 0; k < d; ++k) {
        x[k] = uniform(probe_rng, -config.diag_box, config.diag_box);
      }
      probes.push_back(std::move(x));
    }
  }

  Rng sample_rng(derive_seed(config.master_seed, stream::kDiagnostics, 1));
  std::ofstream out;
  if (options.write_files) {
    out.open(options.out_dir / "diagnostics.csv", std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot open diagnostics.csv for writing");
    }
    out << "probe,agent,c,mean,bias,variance,bound,sample_mean,sample_stderr,samples\n";
  }
  for (std::size_t p = 0; p < probes.size(); ++p) {
    for (double c : config.c_values) {
      for (int agent = 0; agent < d; ++agent) {
        const EstimatorDiagnostics diag = enumerate_diagnostics(obj, agent, probes[p], c);
        const SampledDiagnostics sampled =
            sample_diagnostics(obj, agent, probes[p], c, config.diag_samples, sample_rng);
        const double bound = variance_bound(obj, agent, probes[p]);
        if (options.write_files) {
          out << p << ',' << agent << ',' << format_double(c) << ','
              << format_double(diag.mean[agent]) << ',' << format_double(diag.bias[agent]) << ','
              << format_double(diag.variance[agent]) << ',' << format_double(bound) << ','
              << format_double(sampled.mean[agent]) << ','
              << format_double(sampled.std_error[agent]) << ',' << sampled.samples << "\n";
        }
      }
    }
  }
}

}  // namespace dspg
