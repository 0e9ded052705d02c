#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dspg/estimator.hpp"
#include "dspg/network.hpp"
#include "dspg/objective.hpp"
#include "dspg/schedule.hpp"

namespace dspg {

enum class ActivationKind { kAllActive, kBernoulli, kRoundRobin };

struct ActivationPolicy {
  ActivationKind kind = ActivationKind::kAllActive;
  double p_active = 1.0;  // bernoulli only

  void validate() const;
};

enum class RunStatus { kOk, kDiverged };

// One agent's private state: its coordinate, its local update count (which
// indexes its step-size schedule), its sensitivity parameter and its own
// perturbation stream. The stream is owned exclusively, so network randomness
// never perturbs estimator randomness.
struct AgentState {
  int index = 0;
  std::int64_t local_clock = 0;
  double own_coord = 0.0;
  double c = 0.1;
  double last_gamma = 0.0;
  Rng rng;
};

// Reusable scratch for one update: the stale view and the two perturbed
// evaluation points.
struct UpdateWorkspace {
  Vector signs;
  Vector view;
  Vector plus;
  Vector minus;

  explicit UpdateWorkspace(int d) : signs(d), view(d), plus(d), minus(d) {}
};

// One descent step in the agent's own direction: sample a perturbation, form
// the stale view, estimate the partial derivative, move, bump the local
// clock. The clock advances even when gamma is zero.
void agent_update(AgentState& state, const ObjectiveSet& obj, const Mailbox& mailbox,
                  double gamma, UpdateWorkspace& ws);
void agent_update(AgentState& state, const ObjectiveSet& obj, const Mailbox& mailbox,
                  double gamma);

struct TraceRecord {
  std::int64_t tick = 0;
  Vector coords;
  double norm = 0.0;
  Vector staleness_error;  // per agent, against the current estimate
  Vector gamma;            // most recent step size used per agent
  // Consensus runs only: first and second moments over (k, j, i) triples of
  // the compound delay tau_hat + tau.
  double mean_compound_staleness = 0.0;
  double mean_sq_compound_staleness = 0.0;
};

struct Trace {
  std::vector<TraceRecord> records;
  int subsample_stride = 1;
};

struct SimulationParams {
  ObjectiveSet objectives;
  Vector c;  // per-agent sensitivity parameters, all entries > 0
  ChannelConfig channel;
  ActivationPolicy activation;
  StepSchedule schedule;
  std::int64_t iterations = 0;
  std::uint64_t master_seed = 0;
  int subsample_stride = 1;
  std::optional<Vector> init;  // default: uniform on [-5, 5]^d from a derived stream
  double divergence_guard = 1e12;
  bool record_deliveries = false;

  int dimension() const { return objectives.dimension(); }
  void validate() const;

  static Vector common_c(int d, double c) { return Vector::Constant(d, c); }
};

struct SimulationResult {
  Trace trace;
  Vector final_estimate;
  RunStatus status = RunStatus::kOk;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> local_clocks;  // nu(N, i)
  std::int64_t total_updates = 0;
  std::vector<DeliveryRecord> deliveries;  // populated when record_deliveries
};

// The full tick loop: deliveries, activation draw, per-agent updates with
// locally clocked step sizes, trace recording. Deterministic for a given
// master seed, which derives the per-agent estimator/activation streams, the
// network stream and the initializer stream.
SimulationResult run_simulation(const SimulationParams& params);

struct StalenessDecayReport {
  double first_window_mean = 0.0;
  double last_window_mean = 0.0;
  int window = 0;
  // False for constant schedules: without diminishing steps the delay errors
  // need not vanish, so the decay comparison is not meaningful.
  bool premise_holds = true;
};

StalenessDecayReport staleness_decay_report(const Trace& trace, const StepSchedule& schedule,
                                            int window = 1000);

}  // namespace dspg
