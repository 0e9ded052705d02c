#include "dspg/network.hpp"

#include <string>
#include <utility>

namespace dspg {

void ChannelConfig::validate(int d) const {
  std::vector<std::string> issues;
  if (!(p_success > 0.0 && p_success <= 1.0)) {
    issues.push_back("p_success must lie in (0, 1], got " + std::to_string(p_success));
  }
  if (mode == ChannelMode::kDelayedQueue) {
    if (!max_queue_delay.has_value()) {
      issues.push_back("delayed-queue mode requires max_queue_delay");
    } else if (*max_queue_delay < 1) {
      issues.push_back("max_queue_delay must be a positive tick count");
    }
  } else if (max_queue_delay.has_value()) {
    issues.push_back("max_queue_delay is only meaningful in delayed-queue mode");
  }
  for (const auto& ov : overrides) {
    if (ov.from < 0 || ov.from >= d || ov.to < 0 || ov.to >= d || ov.from == ov.to) {
      issues.push_back("channel override names an invalid ordered pair (" +
                       std::to_string(ov.from) + ", " + std::to_string(ov.to) + ")");
    }
    if (!(ov.p_success > 0.0 && ov.p_success <= 1.0)) {
      issues.push_back("channel override probability must lie in (0, 1]");
    }
  }
  if (!issues.empty()) {
    throw ConfigError(std::move(issues));
  }
}

double ChannelConfig::pair_probability(int from, int to) const {
  for (const auto& ov : overrides) {
    if (ov.from == from && ov.to == to) {
      return ov.p_success;
    }
  }
  return p_success;
}

Network::Network(int d, ChannelConfig config, std::uint64_t seed)
    : d_(d), config_(std::move(config)), rng_(seed) {
  if (d_ < 1) {
    throw InvalidDimensionError("network needs at least one agent");
  }
  config_.validate(d_);
  mailboxes_.resize(static_cast<std::size_t>(d_));
  pair_p_.resize(static_cast<std::size_t>(d_) * static_cast<std::size_t>(d_));
  for (int from = 0; from < d_; ++from) {
    for (int to = 0; to < d_; ++to) {
      pair_p_[static_cast<std::size_t>(from * d_ + to)] = config_.pair_probability(from, to);
    }
  }
  if (config_.mode == ChannelMode::kDelayedQueue) {
    queue_.resize(static_cast<std::size_t>(*config_.max_queue_delay) + 1);
  }
  reset(Vector::Zero(d_));
}

void Network::reset(const Vector& initial_coords) {
  if (initial_coords.size() != d_) {
    throw InvalidDimensionError("initial coordinates must have length d");
  }
  tick_ = 0;
  for (int i = 0; i < d_; ++i) {
    Mailbox& box = mailboxes_[static_cast<std::size_t>(i)];
    box.owner = i;
    box.last_value = initial_coords;
    box.staleness.setZero(d_);
    box.origin_tick.setZero(d_);
  }
  for (auto& bucket : queue_) {
    bucket.clear();
  }
}

void Network::refresh_staleness() {
  for (auto& box : mailboxes_) {
    for (int j = 0; j < d_; ++j) {
      box.staleness[j] = tick_ - box.origin_tick[j];
    }
  }
}

void Network::tick_deliveries(const Vector& publishers, const std::vector<bool>& broadcasting,
                              std::vector<DeliveryRecord>* sink) {
  if (publishers.size() != d_ || broadcasting.size() != static_cast<std::size_t>(d_)) {
    throw InvalidDimensionError("publisher and broadcast mask lengths must equal d");
  }
  ++tick_;

  if (config_.mode == ChannelMode::kErasureLatest) {
    for (int from = 0; from < d_; ++from) {
      if (!broadcasting[static_cast<std::size_t>(from)]) continue;
      for (int to = 0; to < d_; ++to) {
        if (to == from) continue;
        const bool ok = bernoulli(rng_, pair_p_[static_cast<std::size_t>(from * d_ + to)]);
        if (ok) {
          Mailbox& box = mailboxes_[static_cast<std::size_t>(to)];
          box.last_value[from] = publishers[from];
          box.origin_tick[from] = tick_;
        }
        if (sink) {
          sink->push_back({tick_, from, to, ok});
        }
      }
    }
  } else {
    // Enqueue surviving broadcasts with a uniform delay, then drain the
    // bucket that matures this tick.
    const int span = *config_.max_queue_delay + 1;
    for (int from = 0; from < d_; ++from) {
      if (!broadcasting[static_cast<std::size_t>(from)]) continue;
      for (int to = 0; to < d_; ++to) {
        if (to == from) continue;
        const bool ok = bernoulli(rng_, pair_p_[static_cast<std::size_t>(from * d_ + to)]);
        if (sink) {
          sink->push_back({tick_, from, to, ok});
        }
        if (!ok) continue;
        const auto delay = static_cast<std::int64_t>(
            uniform_below(rng_, static_cast<std::uint64_t>(span)));
        auto& bucket = queue_[static_cast<std::size_t>((tick_ + delay) % span)];
        bucket.push_back({tick_, from, to, publishers[from]});
      }
    }
    auto& due = queue_[static_cast<std::size_t>(tick_ % span)];
    for (const InFlight& msg : due) {
      Mailbox& box = mailboxes_[static_cast<std::size_t>(msg.to)];
      // Newest wins: an in-flight message that aged past the stored value is
      // dropped rather than rolling the mailbox back.
      if (msg.origin_tick > box.origin_tick[msg.from]) {
        box.last_value[msg.from] = msg.value;
        box.origin_tick[msg.from] = msg.origin_tick;
      }
    }
    due.clear();
  }

  // Own coordinate is always fresh.
  for (int i = 0; i < d_; ++i) {
    Mailbox& box = mailboxes_[static_cast<std::size_t>(i)];
    box.last_value[i] = publishers[i];
    box.origin_tick[i] = tick_;
  }
  refresh_staleness();
}

Vector stale_view(const Mailbox& mailbox, double own_value) {
  Vector out(mailbox.last_value.size());
  stale_view_into(mailbox, own_value, out);
  return out;
}

void stale_view_into(const Mailbox& mailbox, double own_value, Vector& out) {
  out = mailbox.last_value;
  out[mailbox.owner] = own_value;
}

double staleness_error(const Vector& true_x, const Vector& view) {
  if (true_x.size() != view.size()) {
    throw InvalidDimensionError("staleness error needs equal-length vectors");
  }
  return (true_x - view).norm();
}

}  // namespace dspg
