#pragma once

#include <filesystem>
#include <vector>

#include "dspg/config.hpp"
#include "dspg/csv.hpp"
#include "dspg/runtime.hpp"

namespace dspg {

struct SweepRow {
  double c = 0.0;
  double p_c = 0.0;
  double mean_final_norm = 0.0;  // over non-diverged trials; NaN when none finished
  double std_final_norm = 0.0;   // sample std (n-1); 0 for a single trial
  int diverged_count = 0;
  int trials = 0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  std::vector<FinalRow> finals;  // one per (cell, trial), cell-major order

  bool any_cell_all_diverged() const;
};

struct SweepOptions {
  std::filesystem::path out_dir = "out";
  int parallel = 1;
  bool verbose = false;     // also write finals and per-trial traces
  bool write_files = true;  // tests may aggregate in memory only
};

// Simulation parameters for one grid cell and trial. Trial seeds derive from
// the master seed and the trial index alone, so every cell replays the same
// randomness: comparisons across c and p_c are paired, and reordering the
// sweep lists permutes rows without changing any cell's numbers. The
// objective family is fixed for the whole experiment (from objective_seed, or
// derived from the master seed when absent); trials rerun the same instance
// with fresh initialization, perturbation and channel randomness.
SimulationParams cell_params(const ExperimentConfig& config, double c, double p_c,
                             int trial_index);

std::uint64_t trial_seed(const ExperimentConfig& config, int trial_index);

// Runs trials for every (c, p_c) cell, in parallel up to options.parallel,
// and writes summary.csv (plus finals.csv and traces under verbose).
SweepSummary run_sweep(const ExperimentConfig& config, const SweepOptions& options);

// Columns: c, p_c, mean_final_norm, std_final_norm, diverged_count, trials.
void write_summary_csv(const std::filesystem::path& path, const SweepSummary& summary);

// Single run (first cell, trial 0): writes trace.csv and final.csv, plus
// deliveries.csv under verbose.
SimulationResult run_single(const ExperimentConfig& config, const SweepOptions& options);

// Estimator diagnostics over a probe grid: enumerated mean/bias/variance per
// agent with the variance bound and a sampled cross-check. Writes
// diagnostics.csv.
void run_diagnostics(const ExperimentConfig& config, const SweepOptions& options);

}  // namespace dspg
