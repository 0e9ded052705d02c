#include "dspg/runtime.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace dspg {

void ActivationPolicy::validate() const {
  if (kind == ActivationKind::kBernoulli && !(p_active > 0.0 && p_active <= 1.0)) {
    throw ConfigError({"p_active must lie in (0, 1], got " + std::to_string(p_active)});
  }
}

void StepSchedule::validate() const {
  std::vector<std::string> issues;
  const auto check_unit = [&issues](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      issues.push_back(std::string(name) + " must lie in [0, 1], got " + std::to_string(v));
    }
  };
  if (kind != ScheduleKind::kDiminishing) {
    check_unit(gamma0, "gamma0");
  }
  if (kind != ScheduleKind::kConstant) {
    if (!(a > 0.0)) {
      issues.push_back("a must be positive");
    }
    if (b < 0.0) {
      issues.push_back("b must be nonnegative");
    }
    // First emitted tail value must already sit in [0, 1].
    double first_index = 0.0;
    if (kind == ScheduleKind::kHybrid && !offset_at_switch) {
      first_index = static_cast<double>(switch_tick);
    }
    if (first_index + b <= 0.0) {
      issues.push_back("diminishing tail would divide by zero at its first step");
    } else {
      check_unit(a / (first_index + b), "first diminishing step");
    }
  }
  if (kind == ScheduleKind::kHybrid && switch_tick < 0) {
    issues.push_back("switch_tick must be nonnegative");
  }
  if (!issues.empty()) {
    throw ConfigError(std::move(issues));
  }
}

void SimulationParams::validate() const {
  std::vector<std::string> issues;
  const int d = objectives.dimension();
  if (d < 1) {
    issues.push_back("objective set is empty");
  }
  if (c.size() != d) {
    issues.push_back("per-agent sensitivity vector must have length d");
  }
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0)) {
      issues.push_back("sensitivity parameters must be positive");
      break;
    }
  }
  if (iterations < 0) {
    issues.push_back("iterations must be nonnegative");
  }
  if (subsample_stride < 1) {
    issues.push_back("subsample_stride must be at least 1");
  }
  if (init && init->size() != d) {
    issues.push_back("initial estimate must have length d");
  }
  if (!(divergence_guard > 0.0)) {
    issues.push_back("divergence guard must be positive");
  }
  if (!issues.empty()) {
    throw ConfigError(std::move(issues));
  }
  channel.validate(d);
  activation.validate();
  schedule.validate();
}

void agent_update(AgentState& state, const ObjectiveSet& obj, const Mailbox& mailbox,
                  double gamma, UpdateWorkspace& ws) {
  sample_signs(state.rng, ws.signs);
  stale_view_into(mailbox, state.own_coord, ws.view);
  const double num =
      perturbed_difference(obj, state.index, ws.view, ws.signs, state.c, ws.plus, ws.minus);
  const double estimate = num * ws.signs[state.index] / (2.0 * state.c);
  state.own_coord -= gamma * estimate;
  state.last_gamma = gamma;
  ++state.local_clock;
}

void agent_update(AgentState& state, const ObjectiveSet& obj, const Mailbox& mailbox,
                  double gamma) {
  UpdateWorkspace ws(static_cast<int>(mailbox.last_value.size()));
  agent_update(state, obj, mailbox, gamma, ws);
}

namespace {

Vector draw_initial(const SimulationParams& params, int d) {
  if (params.init) {
    return *params.init;
  }
  Rng init_rng(derive_seed(params.master_seed, stream::kInit));
  Vector x0(d);
  for (int i = 0; i < d; ++i) {
    x0[i] = uniform(init_rng, -5.0, 5.0);
  }
  return x0;
}

}  // namespace

SimulationResult run_simulation(const SimulationParams& params) {
  params.validate();
  const int d = params.dimension();
  const std::int64_t n_ticks = params.iterations;

  std::vector<AgentState> agents(static_cast<std::size_t>(d));
  std::vector<Rng> activation_rngs;
  activation_rngs.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    AgentState& st = agents[static_cast<std::size_t>(i)];
    st.index = i;
    st.c = params.c[i];
    st.rng.seed(derive_seed(params.master_seed, stream::kEstimator, static_cast<std::uint64_t>(i)));
    activation_rngs.emplace_back(
        derive_seed(params.master_seed, stream::kActivation, static_cast<std::uint64_t>(i)));
  }

  Vector x = draw_initial(params, d);
  for (int i = 0; i < d; ++i) {
    agents[static_cast<std::size_t>(i)].own_coord = x[i];
  }

  Network net(d, params.channel, derive_seed(params.master_seed, stream::kNetwork));
  net.reset(x);

  SimulationResult result;
  result.trace.subsample_stride = params.subsample_stride;
  result.status = RunStatus::kOk;

  std::vector<bool> broadcasting(static_cast<std::size_t>(d), true);
  std::vector<bool> active(static_cast<std::size_t>(d), true);
  UpdateWorkspace ws(d);
  Vector view_scratch(d);
  Vector stale_err(d);

  const auto record_row = [&](std::int64_t tick) {
    TraceRecord row;
    row.tick = tick;
    row.coords = x;
    row.norm = x.norm();
    row.staleness_error = stale_err;
    row.gamma.resize(d);
    for (int i = 0; i < d; ++i) {
      row.gamma[i] = agents[static_cast<std::size_t>(i)].last_gamma;
    }
    result.trace.records.push_back(std::move(row));
  };

  bool diverged = false;
  for (std::int64_t tick = 0; tick < n_ticks && !diverged; ++tick) {
    // Agents that updated last tick broadcast the new value; the rest are
    // silent. Deliveries precede this tick's activation draw.
    net.tick_deliveries(x, broadcasting,
                        params.record_deliveries ? &result.deliveries : nullptr);

    // Delay error against the state the updates below will read: with perfect
    // channels every view now equals x and the error vanishes.
    for (int i = 0; i < d; ++i) {
      stale_view_into(net.mailbox(i), x[i], view_scratch);
      stale_err[i] = staleness_error(x, view_scratch);
    }

    switch (params.activation.kind) {
      case ActivationKind::kAllActive:
        std::fill(active.begin(), active.end(), true);
        break;
      case ActivationKind::kBernoulli:
        for (int i = 0; i < d; ++i) {
          active[static_cast<std::size_t>(i)] =
              bernoulli(activation_rngs[static_cast<std::size_t>(i)], params.activation.p_active);
        }
        break;
      case ActivationKind::kRoundRobin:
        for (int i = 0; i < d; ++i) {
          active[static_cast<std::size_t>(i)] = (tick % d == i);
        }
        break;
    }

    for (int i = 0; i < d && !diverged; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      AgentState& st = agents[static_cast<std::size_t>(i)];
      const double gamma = params.schedule.at(st.local_clock);
      try {
        agent_update(st, params.objectives, net.mailbox(i), gamma, ws);
      } catch (const NumericalOverflowError&) {
        diverged = true;
        break;
      }
      ++result.total_updates;
      x[i] = st.own_coord;
      if (!std::isfinite(st.own_coord) || std::abs(st.own_coord) > params.divergence_guard) {
        diverged = true;
      }
    }
    broadcasting = active;

    const bool is_last = diverged || tick + 1 == n_ticks;
    if (tick % params.subsample_stride == 0 || is_last) {
      record_row(tick);
    }
  }

  result.status = diverged ? RunStatus::kDiverged : RunStatus::kOk;
  result.final_estimate = x;
  result.local_clocks.resize(d);
  for (int i = 0; i < d; ++i) {
    result.local_clocks[i] = agents[static_cast<std::size_t>(i)].local_clock;
  }
  return result;
}

StalenessDecayReport staleness_decay_report(const Trace& trace, const StepSchedule& schedule,
                                            int window) {
  if (trace.records.empty()) {
    throw Error("staleness decay report needs a nonempty trace");
  }
  if (window < 1) {
    throw Error("window must be positive");
  }
  const auto len = static_cast<std::int64_t>(trace.records.size());
  const std::int64_t w = std::min<std::int64_t>(window, len);
  const auto window_mean = [&](std::int64_t begin) {
    double total = 0.0;
    for (std::int64_t r = begin; r < begin + w; ++r) {
      total += trace.records[static_cast<std::size_t>(r)].staleness_error.mean();
    }
    return total / static_cast<double>(w);
  };
  StalenessDecayReport report;
  report.window = static_cast<int>(w);
  report.first_window_mean = window_mean(0);
  report.last_window_mean = window_mean(len - w);
  report.premise_holds = schedule.diminishes();
  return report;
}

}  // namespace dspg
