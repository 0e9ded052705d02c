#include "dspg/csv.hpp"

#include <fstream>

#include <fmt/format.h>

namespace dspg {

std::string format_double(double v) { return fmt::format("{}", v); }

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error("cannot open output file for writing: " + path.string());
  }
  return out;
}

}  // namespace

void write_trace_csv(const std::filesystem::path& path, const Trace& trace, bool consensus) {
  auto out = open_for_write(path);
  out << "tick,norm,staleness_err_mean,gamma_agent_0";
  if (consensus) out << ",mean_compound_staleness";
  out << "\n";
  for (const TraceRecord& row : trace.records) {
    out << row.tick << ',' << format_double(row.norm) << ','
        << format_double(row.staleness_error.mean()) << ',' << format_double(row.gamma[0]);
    if (consensus) out << ',' << format_double(row.mean_compound_staleness);
    out << "\n";
  }
}

void write_final_state_csv(const std::filesystem::path& path, const std::vector<FinalRow>& rows) {
  auto out = open_for_write(path);
  out << "trial,seed,c,p_c,final_norm,status";
  const Eigen::Index d = rows.empty() ? 0 : rows.front().final_coords.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    out << ",x" << i;
  }
  out << "\n";
  for (const FinalRow& row : rows) {
    out << row.trial << ',' << row.seed << ',' << format_double(row.c) << ','
        << format_double(row.p_c) << ',' << format_double(row.final_norm) << ','
        << (row.status == RunStatus::kOk ? "ok" : "diverged");
    for (Eigen::Index i = 0; i < row.final_coords.size(); ++i) {
      out << ',' << format_double(row.final_coords[i]);
    }
    out << "\n";
  }
}

void write_deliveries_csv(const std::filesystem::path& path,
                          const std::vector<DeliveryRecord>& records) {
  auto out = open_for_write(path);
  out << "tick,from,to,delivered\n";
  for (const DeliveryRecord& rec : records) {
    out << rec.tick << ',' << rec.from << ',' << rec.to << ',' << (rec.delivered ? 1 : 0) << "\n";
  }
}

}  // namespace dspg
