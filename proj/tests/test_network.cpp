#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dspg/network.hpp"

using namespace dspg;

namespace {

std::vector<bool> all_on(int d) { return std::vector<bool>(static_cast<std::size_t>(d), true); }

}  // namespace

TEST_CASE("perfect channels keep every mailbox current") {
  ChannelConfig cfg;
  cfg.p_success = 1.0;
  Network net(3, cfg, 1);
  Vector x(3);
  x << 1.0, 2.0, 3.0;
  net.reset(x);
  for (int tick = 0; tick < 5; ++tick) {
    x.array() += 1.0;
    net.tick_deliveries(x, all_on(3));
    for (int i = 0; i < 3; ++i) {
      CHECK(net.mailbox(i).last_value == x);
      CHECK(net.mailbox(i).staleness.maxCoeff() == 0);
      CHECK(stale_view(net.mailbox(i), x[i]) == x);
    }
  }
}

TEST_CASE("a dead channel freezes values and counts age") {
  ChannelConfig cfg;
  cfg.p_success = 1e-12;
  Network net(2, cfg, 2);
  Vector x(2);
  x << 5.0, -5.0;
  net.reset(x);
  Vector current = x;
  for (int tick = 1; tick <= 10; ++tick) {
    current.array() += 1.0;
    net.tick_deliveries(current, all_on(2));
    CHECK(net.mailbox(0).last_value[1] == -5.0);
    CHECK(net.mailbox(1).last_value[0] == 5.0);
    CHECK(net.mailbox(0).staleness[1] == tick);
    CHECK(net.mailbox(0).staleness[0] == 0);
  }
}

TEST_CASE("stale view mixes own fresh coordinate with mailbox values") {
  Mailbox box;
  box.owner = 0;
  box.last_value.resize(2);
  box.last_value << 3.0, 7.0;
  box.staleness.setZero(2);
  box.origin_tick.setZero(2);
  const Vector view = stale_view(box, 9.5);
  CHECK(view[0] == 9.5);
  CHECK(view[1] == 7.0);
}

TEST_CASE("staleness error worked examples") {
  Vector a(2), b(2);
  a << 1.0, 0.0;
  b << 0.0, 0.0;
  CHECK(staleness_error(a, a) == 0.0);
  CHECK(staleness_error(a, b) == 1.0);
  Vector p(2), q(2);
  p << 3.0, 4.0;
  q << 0.0, 0.0;
  CHECK(staleness_error(p, q) == 5.0);
}

TEST_CASE("erasure staleness is geometric: first and second moments") {
  const int d = 4;
  const int ticks = 100000;
  for (double p : {0.5, 0.9}) {
    ChannelConfig cfg;
    cfg.p_success = p;
    Network net(d, cfg, 77);
    net.reset(Vector::Zero(d));
    const Vector publishers = Vector::Zero(d);
    double sum = 0.0, sum_sq = 0.0;
    std::int64_t count = 0;
    for (int tick = 0; tick < ticks; ++tick) {
      net.tick_deliveries(publishers, all_on(d));
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (i == j) continue;
          const auto s = static_cast<double>(net.mailbox(i).staleness[j]);
          sum += s;
          sum_sq += s * s;
          ++count;
        }
      }
    }
    const double mean = sum / static_cast<double>(count);
    const double second = sum_sq / static_cast<double>(count);
    const double mean_expected = (1.0 - p) / p;
    const double second_expected = (1.0 - p) * (2.0 - p) / (p * p);
    CHECK(std::abs(mean - mean_expected) <= 0.05 * std::max(mean_expected, 0.05));
    CHECK(std::abs(second - second_expected) <= 0.10 * std::max(second_expected, 0.05));
  }
}

TEST_CASE("mean staleness at one half is about one") {
  ChannelConfig cfg;
  cfg.p_success = 0.5;
  Network net(2, cfg, 5);
  net.reset(Vector::Zero(2));
  double sum = 0.0;
  const int ticks = 200000;
  for (int tick = 0; tick < ticks; ++tick) {
    net.tick_deliveries(Vector::Zero(2), all_on(2));
    sum += static_cast<double>(net.mailbox(0).staleness[1]);
  }
  CHECK(std::abs(sum / ticks - 1.0) <= 0.05);
}

TEST_CASE("stored origin ticks never decrease") {
  for (ChannelMode mode : {ChannelMode::kErasureLatest, ChannelMode::kDelayedQueue}) {
    ChannelConfig cfg;
    cfg.p_success = 0.4;
    cfg.mode = mode;
    if (mode == ChannelMode::kDelayedQueue) cfg.max_queue_delay = 4;
    Network net(3, cfg, 11);
    net.reset(Vector::Zero(3));
    auto previous = net.mailbox(0).origin_tick;
    for (int tick = 0; tick < 2000; ++tick) {
      net.tick_deliveries(Vector::Constant(3, static_cast<double>(tick)), all_on(3));
      for (int i = 0; i < 3; ++i) {
        const auto& now = net.mailbox(i).origin_tick;
        for (int j = 0; j < 3; ++j) {
          CHECK(now[j] >= (i == 0 ? previous[j] : 0));
        }
      }
      previous = net.mailbox(0).origin_tick;
    }
  }
}

TEST_CASE("identical seeds give identical delivery streams") {
  ChannelConfig cfg;
  cfg.p_success = 0.6;
  Network a(3, cfg, 123), b(3, cfg, 123);
  a.reset(Vector::Zero(3));
  b.reset(Vector::Zero(3));
  std::vector<DeliveryRecord> ra, rb;
  for (int tick = 0; tick < 200; ++tick) {
    a.tick_deliveries(Vector::Zero(3), all_on(3), &ra);
    b.tick_deliveries(Vector::Zero(3), all_on(3), &rb);
  }
  REQUIRE(ra.size() == rb.size());
  for (std::size_t k = 0; k < ra.size(); ++k) {
    CHECK(ra[k].tick == rb[k].tick);
    CHECK(ra[k].from == rb[k].from);
    CHECK(ra[k].to == rb[k].to);
    CHECK(ra[k].delivered == rb[k].delivered);
  }
}

TEST_CASE("mailboxes only ever hold previously published values") {
  ChannelConfig cfg;
  cfg.p_success = 0.5;
  cfg.mode = ChannelMode::kDelayedQueue;
  cfg.max_queue_delay = 3;
  Network net(2, cfg, 9);
  Vector x(2);
  x << 0.0, 100.0;
  net.reset(x);
  std::vector<double> published0{0.0};
  Rng walk(3);
  for (int tick = 0; tick < 1000; ++tick) {
    x[0] += uniform(walk, -1.0, 1.0);
    published0.push_back(x[0]);
    net.tick_deliveries(x, all_on(2));
    const double held = net.mailbox(1).last_value[0];
    bool seen = false;
    for (double v : published0) {
      if (v == held) {
        seen = true;
        break;
      }
    }
    CHECK(seen);
  }
}

TEST_CASE("delayed queue delivers at tick + delay and rejects stale overwrites") {
  ChannelConfig cfg;
  cfg.p_success = 1.0;
  cfg.mode = ChannelMode::kDelayedQueue;
  cfg.max_queue_delay = 3;
  Network net(2, cfg, 21);
  Vector x(2);
  x << 1.0, 0.0;
  net.reset(x);
  // With delays bounded by 3, the value visible at tick t is one published in
  // (t-3, t]; by tick k+3 every message sent at k has landed, so the stored
  // origin is at least k.
  for (int tick = 1; tick <= 50; ++tick) {
    x[0] = static_cast<double>(tick);
    net.tick_deliveries(x, all_on(2));
    const auto origin = net.mailbox(1).origin_tick[0];
    CHECK(origin >= std::max<std::int64_t>(0, tick - 3));
    CHECK(origin <= tick);
    CHECK(net.mailbox(1).last_value[0] >= std::max(0.0, static_cast<double>(tick - 3)));
  }
}

TEST_CASE("per-pair overrides shape staleness asymmetrically") {
  ChannelConfig cfg;
  cfg.p_success = 1e-12;
  cfg.overrides = {{0, 1, 1.0}};  // only the 0 -> 1 link works
  Network net(2, cfg, 4);
  net.reset(Vector::Zero(2));
  for (int tick = 1; tick <= 20; ++tick) {
    net.tick_deliveries(Vector::Zero(2), all_on(2));
    CHECK(net.mailbox(1).staleness[0] == 0);
    CHECK(net.mailbox(0).staleness[1] == tick);
  }
}

TEST_CASE("channel config validation") {
  ChannelConfig cfg;
  cfg.p_success = 1.5;
  CHECK_THROWS_AS(cfg.validate(2), ConfigError);
  cfg.p_success = 0.5;
  cfg.mode = ChannelMode::kDelayedQueue;
  CHECK_THROWS_AS(cfg.validate(2), ConfigError);  // missing max_queue_delay
  cfg.max_queue_delay = 2;
  CHECK_NOTHROW(cfg.validate(2));
  cfg.mode = ChannelMode::kErasureLatest;
  CHECK_THROWS_AS(cfg.validate(2), ConfigError);  // stray max_queue_delay
}

TEST_CASE("silent senders produce no deliveries") {
  ChannelConfig cfg;
  cfg.p_success = 1.0;
  Network net(2, cfg, 8);
  Vector x(2);
  x << 1.0, 2.0;
  net.reset(x);
  std::vector<bool> only_first{true, false};
  Vector next(2);
  next << 10.0, 20.0;
  net.tick_deliveries(next, only_first);
  CHECK(net.mailbox(1).last_value[0] == 10.0);
  CHECK(net.mailbox(0).last_value[1] == 2.0);  // silence: old value kept
  CHECK(net.mailbox(0).staleness[1] == 1);
}
