#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dspg/objective.hpp"
#include "dspg/random.hpp"

namespace dspg {

enum class ChannelMode {
  // Every broadcast is delivered same-tick with probability p_success and
  // dropped otherwise; the receiver keeps its old value on a drop. Staleness
  // is then geometric, which keeps its second moment finite.
  kErasureLatest,
  // Surviving broadcasts are queued with an integer delay uniform on
  // {0, ..., max_queue_delay} and delivered that many ticks later. A message
  // older than the stored value is discarded on arrival (newest wins).
  kDelayedQueue,
};

struct PairOverride {
  int from = 0;
  int to = 0;
  double p_success = 1.0;
};

struct ChannelConfig {
  double p_success = 1.0;
  ChannelMode mode = ChannelMode::kErasureLatest;
  std::optional<int> max_queue_delay;  // present iff mode == kDelayedQueue
  std::vector<PairOverride> overrides;

  void validate(int d) const;
  double pair_probability(int from, int to) const;
};

// Agent i's latest successfully received copy of every coordinate.
// staleness(j) is the age in ticks of the stored value (0 for the owner's own
// coordinate, which is refreshed every tick).
struct Mailbox {
  int owner = 0;
  Vector last_value;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> staleness;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> origin_tick;
};

struct DeliveryRecord {
  std::int64_t tick = 0;
  int from = 0;
  int to = 0;
  bool delivered = false;
};

// Pairwise unidirectional erasure channels plus the d mailboxes they feed.
// Exactly one writer advances the network per tick; agents read mailboxes
// between ticks.
class Network {
 public:
  Network(int d, ChannelConfig config, std::uint64_t seed);

  // Seeds every mailbox with the initial coordinates at tick 0.
  void reset(const Vector& initial_coords);

  // Advances one tick. Sender j attempts a delivery to every i != j when
  // broadcasting[j] is true; silent senders generate no channel draws. In
  // erasure-latest mode one DeliveryRecord per attempted ordered pair goes to
  // `sink` when non-null.
  void tick_deliveries(const Vector& publishers, const std::vector<bool>& broadcasting,
                       std::vector<DeliveryRecord>* sink = nullptr);

  const Mailbox& mailbox(int agent) const { return mailboxes_[static_cast<std::size_t>(agent)]; }
  std::int64_t tick() const noexcept { return tick_; }
  int dimension() const noexcept { return d_; }

 private:
  struct InFlight {
    std::int64_t origin_tick = 0;
    int from = 0;
    int to = 0;
    double value = 0.0;
  };

  void refresh_staleness();

  int d_ = 0;
  ChannelConfig config_;
  Rng rng_;
  std::int64_t tick_ = 0;
  std::vector<Mailbox> mailboxes_;
  std::vector<double> pair_p_;  // row-major [from * d + to], overrides applied
  // Delayed-queue buckets keyed by delivery tick modulo (max_queue_delay + 1).
  std::vector<std::vector<InFlight>> queue_;
};

// The caller's view of the global estimate: its own current coordinate at its
// own position, newest received values elsewhere. Pure read.
Vector stale_view(const Mailbox& mailbox, double own_value);
void stale_view_into(const Mailbox& mailbox, double own_value, Vector& out);

// Euclidean distance between the true estimate and a delayed view of it.
double staleness_error(const Vector& true_x, const Vector& view);

}  // namespace dspg
