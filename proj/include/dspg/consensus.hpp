#pragma once

#include <cstdint>
#include <vector>

#include "dspg/runtime.hpp"

namespace dspg {

// One coordinate of agent j's full gradient estimate, addressed to the agent
// that owns that coordinate.
struct GradShare {
  int origin = 0;
  int target_coord = 0;
  double value = 0.0;
  std::int64_t origin_tick = 0;
};

// Latest share received from every origin, plus the origin's coordinate
// staleness snapshot taken when it computed that share (column j holds the
// snapshot attached to origin j's stored share). The snapshot is what makes
// the compound delay tau_hat + tau measurable after the fact.
struct ConsensusMailbox {
  int owner = 0;
  Vector share_value;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> share_origin_tick;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> coord_staleness_snapshot;
};

// All d shares from one evaluation pair: share(k) = num * signs(k) / (2c)
// where num = f_agent(view + c*delta) - f_agent(view - c*delta). Exactly two
// objective evaluations regardless of d.
Vector compute_shares(const ObjectiveSet& obj, int agent, const Vector& view,
                      const Vector& signs, double c);

// Enumerated mean of compute_shares over all 2^d sign patterns; the
// deterministic test mode substitutes this for sampled shares.
Vector enumerate_mean_shares(const ObjectiveSet& obj, int agent, const Vector& view, double c);

// Descend on the summed shares: own_coord -= gamma * sum_j share_j. Shares
// default to zero until first receipt, which keeps early steps a partial
// gradient descent.
void consensus_update(AgentState& state, const Vector& received_shares, double gamma);

struct ConsensusParams {
  SimulationParams base;
  // Test-only: replace sampled shares with their enumerated means, isolating
  // network staleness from Monte-Carlo noise.
  bool deterministic_mean = false;
};

// Two network stages per tick through independent erasure channels with the
// same success probability: coordinate exchange, share computation, share
// exchange, then descent.
SimulationResult run_consensus(const ConsensusParams& params);

// argmin of sum_i F_i for the quadratic family: the solution of
// (sum A_i) x = sum A_i s_i.
Vector consensus_minimizer(const QuadraticSpec& spec);

}  // namespace dspg
