#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dspg/network.hpp"
#include "dspg/objective.hpp"
#include "dspg/runtime.hpp"
#include "dspg/schedule.hpp"

namespace dspg {

enum class RunMode { kDspg, kConsensus, kDiagnostics };

enum class ObjectiveKind { kQuadraticRandom, kQuartic1d };

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::kQuadraticRandom;
  // Fixed matrices for the whole experiment when set; otherwise each trial
  // draws its own family from a seed derived from the trial seed.
  std::optional<std::uint64_t> seed;
  std::optional<Vector> x_star;  // common minimizer translation
};

// Parsed experiment document. c and p_c hold the sweep axes; singletons give
// a single cell.
struct ExperimentConfig {
  RunMode mode = RunMode::kDspg;
  int d = 1;
  ObjectiveSpec objective;
  std::vector<double> c_values;
  std::vector<double> p_values;
  ActivationPolicy activation;
  StepSchedule schedule;
  std::int64_t iterations = 0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  int subsample_stride = 1;
  std::string output_path = "out";
  ChannelMode delay_mode = ChannelMode::kErasureLatest;
  std::optional<int> max_queue_delay;
  std::vector<PairOverride> p_overrides;
  std::optional<Vector> init;

  // Diagnostics mode only.
  int diag_probes = 20;
  double diag_box = 2.0;
  std::vector<double> diag_x;  // explicit 1-D probe points
  std::int64_t diag_samples = 10000;
};

// Parses the flat key = value format (one pair per line, '#' comments,
// [v1, v2, ...] lists, [lo:hi:step] inclusive ranges). Throws ConfigError
// carrying every problem found, not just the first.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::filesystem::path& path);

}  // namespace dspg
