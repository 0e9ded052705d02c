#include "dspg/consensus.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

namespace dspg {

Vector compute_shares(const ObjectiveSet& obj, int agent, const Vector& view,
                      const Vector& signs, double c) {
  Vector plus(view.size()), minus(view.size());
  const double num = perturbed_difference(obj, agent, view, signs, c, plus, minus);
  Vector shares(view.size());
  for (Eigen::Index k = 0; k < view.size(); ++k) {
    shares[k] = num * signs[k] / (2.0 * c);
  }
  return shares;
}

Vector enumerate_mean_shares(const ObjectiveSet& obj, int agent, const Vector& view, double c) {
  const int d = static_cast<int>(view.size());
  if (d > kEnumerationLimit) {
    throw EnumerationLimitError("share enumeration limited to d <= " +
                                std::to_string(kEnumerationLimit));
  }
  const std::uint64_t patterns = 1ULL << d;
  Vector mean = Vector::Zero(d);
  Vector signs(d), plus(d), minus(d);
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    for (int k = 0; k < d; ++k) {
      signs[k] = (mask >> k) & 1ULL ? 1.0 : -1.0;
    }
    const double base = perturbed_difference(obj, agent, view, signs, c, plus, minus) / (2.0 * c);
    for (int k = 0; k < d; ++k) {
      mean[k] += ((mask >> k) & 1ULL ? base : -base);
    }
  }
  return mean / static_cast<double>(patterns);
}

void consensus_update(AgentState& state, const Vector& received_shares, double gamma) {
  state.own_coord -= gamma * received_shares.sum();
  state.last_gamma = gamma;
  ++state.local_clock;
}

SimulationResult run_consensus(const ConsensusParams& params) {
  const SimulationParams& base = params.base;
  base.validate();
  const int d = base.dimension();
  const std::int64_t n_ticks = base.iterations;

  std::vector<AgentState> agents(static_cast<std::size_t>(d));
  std::vector<Rng> activation_rngs;
  activation_rngs.reserve(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    AgentState& st = agents[static_cast<std::size_t>(i)];
    st.index = i;
    st.c = base.c[i];
    st.rng.seed(derive_seed(base.master_seed, stream::kEstimator, static_cast<std::uint64_t>(i)));
    activation_rngs.emplace_back(
        derive_seed(base.master_seed, stream::kActivation, static_cast<std::uint64_t>(i)));
  }

  Vector x;
  if (base.init) {
    x = *base.init;
  } else {
    Rng init_rng(derive_seed(base.master_seed, stream::kInit));
    x.resize(d);
    for (int i = 0; i < d; ++i) {
      x[i] = uniform(init_rng, -5.0, 5.0);
    }
  }
  for (int i = 0; i < d; ++i) {
    agents[static_cast<std::size_t>(i)].own_coord = x[i];
  }

  Network coord_net(d, base.channel, derive_seed(base.master_seed, stream::kNetwork));
  coord_net.reset(x);
  Rng share_rng(derive_seed(base.master_seed, stream::kShareNetwork));

  std::vector<ConsensusMailbox> share_boxes(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    ConsensusMailbox& box = share_boxes[static_cast<std::size_t>(i)];
    box.owner = i;
    box.share_value = Vector::Zero(d);
    box.share_origin_tick.setZero(d);
    box.coord_staleness_snapshot.setZero(d, d);
  }

  SimulationResult result;
  result.trace.subsample_stride = base.subsample_stride;

  std::vector<bool> broadcasting(static_cast<std::size_t>(d), true);
  std::vector<bool> active(static_cast<std::size_t>(d), true);
  std::vector<Vector> fresh_shares(static_cast<std::size_t>(d));
  Vector signs(d), view(d), view_scratch(d);

  const auto compound_staleness_moments = [&](std::int64_t now) {
    // Moments of tau_hat_ji + tau_kj(computed-at) over j != i, k != j.
    double total = 0.0, total_sq = 0.0;
    std::int64_t count = 0;
    for (int i = 0; i < d; ++i) {
      const ConsensusMailbox& box = share_boxes[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) {
        if (j == i) continue;
        const auto share_age = static_cast<double>(now - box.share_origin_tick[j]);
        for (int k = 0; k < d; ++k) {
          if (k == j) continue;
          const double age = share_age + static_cast<double>(box.coord_staleness_snapshot(k, j));
          total += age;
          total_sq += age * age;
          ++count;
        }
      }
    }
    if (count == 0) return std::pair{0.0, 0.0};
    const double n = static_cast<double>(count);
    return std::pair{total / n, total_sq / n};
  };

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
    const auto [mean_age, mean_sq_age] = compound_staleness_moments(coord_net.tick());
    row.mean_compound_staleness = mean_age;
    row.mean_sq_compound_staleness = mean_sq_age;
    result.trace.records.push_back(std::move(row));
  };

  bool diverged = false;
  for (std::int64_t tick = 0; tick < n_ticks && !diverged; ++tick) {
    // Stage 1: coordinate exchange.
    coord_net.tick_deliveries(x, broadcasting,
                              base.record_deliveries ? &result.deliveries : nullptr);
    const std::int64_t now = coord_net.tick();

    // Delay error against the pre-update state the share computations read.
    for (int i = 0; i < d; ++i) {
      stale_view_into(coord_net.mailbox(i), x[i], view_scratch);
      stale_err[i] = staleness_error(x, view_scratch);
    }

    switch (base.activation.kind) {
      case ActivationKind::kAllActive:
        std::fill(active.begin(), active.end(), true);
        break;
      case ActivationKind::kBernoulli:
        for (int i = 0; i < d; ++i) {
          active[static_cast<std::size_t>(i)] =
              bernoulli(activation_rngs[static_cast<std::size_t>(i)], base.activation.p_active);
        }
        break;
      case ActivationKind::kRoundRobin:
        for (int i = 0; i < d; ++i) {
          active[static_cast<std::size_t>(i)] = (tick % d == i);
        }
        break;
    }

    // Stage 2: active agents estimate all d partials from one evaluation pair
    // at their current stale view.
    try {
      for (int j = 0; j < d; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        AgentState& st = agents[static_cast<std::size_t>(j)];
        stale_view_into(coord_net.mailbox(j), st.own_coord, view);
        if (params.deterministic_mean) {
          fresh_shares[static_cast<std::size_t>(j)] =
              enumerate_mean_shares(base.objectives, j, view, st.c);
        } else {
          sample_signs(st.rng, signs);
          fresh_shares[static_cast<std::size_t>(j)] =
              compute_shares(base.objectives, j, view, signs, st.c);
        }
      }
    } catch (const NumericalOverflowError&) {
      diverged = true;
    }

    if (!diverged) {
      // Stage 3: share exchange over independent erasure channels. The own
      // share is local and lands unconditionally.
      for (int j = 0; j < d; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        const Vector& shares = fresh_shares[static_cast<std::size_t>(j)];
        const auto& sender_staleness = coord_net.mailbox(j).staleness;
        for (int i = 0; i < d; ++i) {
          if (i == j) continue;
          if (!bernoulli(share_rng, base.channel.pair_probability(j, i))) continue;
          ConsensusMailbox& box = share_boxes[static_cast<std::size_t>(i)];
          if (now > box.share_origin_tick[j]) {  // newest wins
            box.share_value[j] = shares[i];
            box.share_origin_tick[j] = now;
            box.coord_staleness_snapshot.col(j) = sender_staleness;
          }
        }
        ConsensusMailbox& own_box = share_boxes[static_cast<std::size_t>(j)];
        own_box.share_value[j] = shares[j];
        own_box.share_origin_tick[j] = now;
        own_box.coord_staleness_snapshot.col(j) = sender_staleness;
      }

      // Stage 4: descent on the summed shares.
      for (int i = 0; i < d && !diverged; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        AgentState& st = agents[static_cast<std::size_t>(i)];
        const double gamma = base.schedule.at(st.local_clock);
        consensus_update(st, share_boxes[static_cast<std::size_t>(i)].share_value, gamma);
        ++result.total_updates;
        x[i] = st.own_coord;
        if (!std::isfinite(st.own_coord) || std::abs(st.own_coord) > base.divergence_guard) {
          diverged = true;
        }
      }
    }
    broadcasting = active;

    const bool is_last = diverged || tick + 1 == n_ticks;
    if (tick % base.subsample_stride == 0 || is_last) {
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

Vector consensus_minimizer(const QuadraticSpec& spec) {
  const int d = spec.dimension();
  Matrix total = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (int i = 0; i < d; ++i) {
    total += spec.matrices[static_cast<std::size_t>(i)];
    rhs += spec.matrices[static_cast<std::size_t>(i)] * spec.shifts[static_cast<std::size_t>(i)];
  }
  return total.ldlt().solve(rhs);
}

}  // namespace dspg
