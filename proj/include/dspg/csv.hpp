#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dspg/network.hpp"
#include "dspg/runtime.hpp"

namespace dspg {

// Shortest round-trip decimal form; identical inputs always format to
// identical bytes, which is what the reproducibility contract rides on.
std::string format_double(double v);

// Columns: tick, norm, staleness_err_mean, gamma_agent_0, and additionally
// mean_compound_staleness for consensus traces.
void write_trace_csv(const std::filesystem::path& path, const Trace& trace,
                     bool consensus = false);

struct FinalRow {
  int trial = 0;
  std::uint64_t seed = 0;
  double c = 0.0;
  double p_c = 0.0;
  double final_norm = 0.0;
  RunStatus status = RunStatus::kOk;
  Vector final_coords;
};

// Columns: trial, seed, c, p_c, final_norm, status, x0..x{d-1}.
void write_final_state_csv(const std::filesystem::path& path, const std::vector<FinalRow>& rows);

// Columns: tick, from, to, delivered.
void write_deliveries_csv(const std::filesystem::path& path,
                          const std::vector<DeliveryRecord>& records);

}  // namespace dspg
