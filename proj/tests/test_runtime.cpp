#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dspg/runtime.hpp"
#include "support/test_helpers.hpp"

using namespace dspg;

namespace {

SimulationParams single_agent_square(double gamma0, double c, double x0) {
  QuadraticSpec spec;
  spec.matrices = {Matrix::Identity(1, 1)};
  spec.shifts = {Vector::Zero(1)};
  SimulationParams params;
  params.objectives = spec.to_objective_set();
  params.c = SimulationParams::common_c(1, c);
  params.schedule.kind = ScheduleKind::kConstant;
  params.schedule.gamma0 = gamma0;
  params.master_seed = 7;
  params.init = Vector::Constant(1, x0);
  return params;
}

}  // namespace

TEST_CASE("schedule values: constant, hybrid phases, diminishing formula") {
  StepSchedule constant;
  constant.kind = ScheduleKind::kConstant;
  constant.gamma0 = 0.001;
  CHECK(constant.at(0) == 0.001);
  CHECK(constant.at(123456) == 0.001);

  StepSchedule hybrid;
  hybrid.kind = ScheduleKind::kHybrid;
  hybrid.gamma0 = 0.001;
  hybrid.switch_tick = 5000;
  hybrid.a = 1.0;
  hybrid.b = 100.0;
  hybrid.offset_at_switch = true;
  CHECK(hybrid.at(0) == 0.001);
  CHECK(hybrid.at(4999) == 0.001);
  CHECK(hybrid.at(5000) == doctest::Approx(0.01));
  CHECK(hybrid.at(5100) == doctest::Approx(1.0 / 200.0));

  StepSchedule anchored = hybrid;
  anchored.offset_at_switch = false;
  anchored.a = 50.0;
  anchored.b = 0.0;
  CHECK(anchored.at(4999) == 0.001);
  CHECK(anchored.at(5000) == doctest::Approx(0.01));
  CHECK(anchored.at(20000) == doctest::Approx(0.0025));

  StepSchedule dim;
  dim.kind = ScheduleKind::kDiminishing;
  dim.a = 1.0;
  dim.b = 1.0;
  CHECK(dim.at(0) == 1.0);
  CHECK(dim.at(9) == doctest::Approx(0.1));
}

TEST_CASE("diminishing partial sums: gamma sums diverge, squares stay bounded") {
  StepSchedule dim;
  dim.kind = ScheduleKind::kDiminishing;
  dim.a = 1.0;
  dim.b = 1.0;
  double sum1 = 0.0, sum1_far = 0.0, sum2 = 0.0;
  const std::int64_t n1 = 100000, n2 = 1000000;
  for (std::int64_t n = 0; n < n2; ++n) {
    const double g = dim.at(n);
    if (n < n1) sum1 += g;
    sum1_far += g;
    sum2 += g * g;
  }
  CHECK(sum1_far - sum1 > 2.0);          // the tail keeps growing like log n
  CHECK(sum2 <= 1.0 + 3.1415926 * 3.1415926 / 6.0);  // bounded by 1 + pi^2/6
}

TEST_CASE("schedule validation rejects out-of-range gammas") {
  StepSchedule bad;
  bad.kind = ScheduleKind::kConstant;
  bad.gamma0 = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  StepSchedule tail;
  tail.kind = ScheduleKind::kDiminishing;
  tail.a = 5.0;
  tail.b = 1.0;  // first step would be 5
  CHECK_THROWS_AS(tail.validate(), ConfigError);

  StepSchedule zero_div;
  zero_div.kind = ScheduleKind::kHybrid;
  zero_div.switch_tick = 0;
  zero_div.offset_at_switch = false;
  zero_div.a = 1.0;
  zero_div.b = 0.0;
  CHECK_THROWS_AS(zero_div.validate(), ConfigError);
}

TEST_CASE("agent update: zero gamma still advances the local clock") {
  const ObjectiveSet obj = testing::constant_objective(2, 1.0);
  Mailbox box;
  box.owner = 0;
  box.last_value = Vector::Zero(2);
  box.staleness.setZero(2);
  box.origin_tick.setZero(2);
  AgentState st;
  st.index = 0;
  st.own_coord = 1.25;
  st.c = 0.1;
  st.rng.seed(3);
  agent_update(st, obj, box, 0.0);
  CHECK(st.own_coord == 1.25);
  CHECK(st.local_clock == 1);
}

TEST_CASE("one-dimensional square contracts by the exact factor") {
  // gamma 0.1, c 0.1: x' = x - 0.1 * 2x = 0.8 x regardless of the sign draw.
  SimulationParams params = single_agent_square(0.1, 0.1, 1.0);
  params.iterations = 10;
  const SimulationResult result = run_simulation(params);
  CHECK(result.status == RunStatus::kOk);
  CHECK(result.final_estimate[0] == doctest::Approx(std::pow(0.8, 10)).epsilon(1e-12));
  params.iterations = 1;
  CHECK(run_simulation(params).final_estimate[0] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("constant objective is a fixed point") {
  SimulationParams params;
  params.objectives = testing::constant_objective(3, 2.0);
  params.c = SimulationParams::common_c(3, 0.5);
  params.schedule.kind = ScheduleKind::kConstant;
  params.schedule.gamma0 = 0.9;
  params.iterations = 50;
  params.master_seed = 21;
  Vector x0(3);
  x0 << 1.0, -2.0, 3.0;
  params.init = x0;
  const SimulationResult result = run_simulation(params);
  CHECK(result.final_estimate == x0);
}

TEST_CASE("zero iterations returns the initialization with an empty trace") {
  SimulationParams params = single_agent_square(0.1, 0.1, 2.5);
  params.iterations = 0;
  const SimulationResult result = run_simulation(params);
  CHECK(result.final_estimate[0] == 2.5);
  CHECK(result.trace.records.empty());
  CHECK(result.local_clocks[0] == 0);
}

TEST_CASE("local clocks count every update under each policy") {
  SimulationParams params;
  params.objectives = make_quadratic_set(4, 31).to_objective_set();
  params.c = SimulationParams::common_c(4, 0.1);
  params.schedule.gamma0 = 0.001;
  params.iterations = 1000;
  params.master_seed = 5;

  SUBCASE("all active") {
    const SimulationResult result = run_simulation(params);
    for (int i = 0; i < 4; ++i) {
      CHECK(result.local_clocks[i] == 1000);
    }
    CHECK(result.total_updates == 4000);
  }
  SUBCASE("round robin shares ticks evenly") {
    params.activation.kind = ActivationKind::kRoundRobin;
    const SimulationResult result = run_simulation(params);
    for (int i = 0; i < 4; ++i) {
      CHECK(result.local_clocks[i] == 250);
    }
    CHECK(result.total_updates == 1000);
  }
  SUBCASE("bernoulli activation sums match") {
    params.activation.kind = ActivationKind::kBernoulli;
    params.activation.p_active = 0.7;
    const SimulationResult result = run_simulation(params);
    CHECK(result.local_clocks.sum() == result.total_updates);
  }
}

TEST_CASE("bernoulli activation is fair at twenty thousand ticks") {
  SimulationParams params;
  params.objectives = make_quadratic_set(4, 31).to_objective_set();
  params.c = SimulationParams::common_c(4, 0.1);
  params.schedule.gamma0 = 0.001;
  params.iterations = 20000;
  params.master_seed = 5;
  params.activation.kind = ActivationKind::kBernoulli;
  params.activation.p_active = 0.6;
  params.subsample_stride = 20000;
  const SimulationResult result = run_simulation(params);
  for (int i = 0; i < 4; ++i) {
    const double rate = static_cast<double>(result.local_clocks[i]) / 20000.0;
    CHECK(rate >= 0.55);
    CHECK(rate <= 0.65);
  }
}

TEST_CASE("identical configs replay identical traces") {
  SimulationParams params;
  params.objectives = make_quadratic_set(3, 17).to_objective_set();
  params.c = SimulationParams::common_c(3, 0.5);
  params.channel.p_success = 0.6;
  params.schedule.gamma0 = 0.01;
  params.iterations = 500;
  params.master_seed = 404;
  params.subsample_stride = 7;
  const SimulationResult a = run_simulation(params);
  const SimulationResult b = run_simulation(params);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t r = 0; r < a.trace.records.size(); ++r) {
    CHECK(a.trace.records[r].tick == b.trace.records[r].tick);
    CHECK(a.trace.records[r].coords == b.trace.records[r].coords);
    CHECK(a.trace.records[r].norm == b.trace.records[r].norm);
    CHECK(a.trace.records[r].staleness_error == b.trace.records[r].staleness_error);
  }
  CHECK(a.final_estimate == b.final_estimate);
}

TEST_CASE("trace records appear on the stride plus the final tick") {
  SimulationParams params = single_agent_square(0.01, 0.1, 1.0);
  params.iterations = 10;
  params.subsample_stride = 4;
  const SimulationResult result = run_simulation(params);
  REQUIRE(result.trace.records.size() == 4);
  CHECK(result.trace.records[0].tick == 0);
  CHECK(result.trace.records[1].tick == 4);
  CHECK(result.trace.records[2].tick == 8);
  CHECK(result.trace.records[3].tick == 9);
}

TEST_CASE("runaway steps trip the divergence guard") {
  // gamma = 1 on a steep quadratic overshoots and doubles every step.
  QuadraticSpec spec;
  spec.matrices = {Matrix::Identity(1, 1) * 50.0};
  spec.shifts = {Vector::Zero(1)};
  SimulationParams params;
  params.objectives = spec.to_objective_set();
  params.c = SimulationParams::common_c(1, 0.1);
  params.schedule.gamma0 = 1.0;
  params.iterations = 2000;
  params.master_seed = 3;
  params.init = Vector::Constant(1, 1.0);
  const SimulationResult result = run_simulation(params);
  CHECK(result.status == RunStatus::kDiverged);
  CHECK(result.local_clocks[0] < 2000);
}

TEST_CASE("non-finite objective values abort the trial as diverged") {
  // Steep quadratic with a finite domain: gamma = 0.4 on slope 10x triples
  // the coordinate each step until an evaluation leaves the domain.
  std::vector<ObjectiveSet::Fn> fns{[](const Vector& x) {
    return std::abs(x[0]) > 3.0 ? std::numeric_limits<double>::infinity()
                                : 5.0 * x[0] * x[0];
  }};
  SimulationParams params;
  params.objectives = ObjectiveSet(std::move(fns));
  params.c = SimulationParams::common_c(1, 0.1);
  params.schedule.gamma0 = 0.4;
  params.iterations = 100;
  params.master_seed = 6;
  params.init = Vector::Constant(1, 2.0);
  const SimulationResult result = run_simulation(params);
  CHECK(result.status == RunStatus::kDiverged);
  CHECK(std::isfinite(result.final_estimate[0]));  // the bad step was not applied
}

TEST_CASE("per-agent sensitivity parameters flow through") {
  // Two agents sharing x^4-style curvature: different c means different bias,
  // so the trajectories must split.
  std::vector<ObjectiveSet::Fn> fns{
      [](const Vector& x) { return std::pow(x[0], 4) + std::pow(x[1], 4); },
      [](const Vector& x) { return std::pow(x[0], 4) + std::pow(x[1], 4); }};
  SimulationParams params;
  params.objectives = ObjectiveSet(std::move(fns));
  Vector c(2);
  c << 0.1, 0.1;
  params.c = c;
  params.schedule.gamma0 = 0.01;
  params.iterations = 200;
  params.master_seed = 50;
  params.init = Vector::Constant(2, 1.0);
  const Vector same_c = run_simulation(params).final_estimate;
  params.c[1] = 2.0;
  const Vector split_c = run_simulation(params).final_estimate;
  CHECK(same_c != split_c);
}

TEST_CASE("staleness decay report: perfect channels and constant schedules") {
  SimulationParams params;
  params.objectives = make_quadratic_set(3, 23).to_objective_set();
  params.c = SimulationParams::common_c(3, 0.1);
  params.channel.p_success = 1.0;
  params.schedule.kind = ScheduleKind::kHybrid;
  params.schedule.gamma0 = 0.001;
  params.schedule.switch_tick = 100;
  params.schedule.a = 1.0;
  params.schedule.b = 100.0;
  params.iterations = 400;
  params.master_seed = 8;
  const SimulationResult result = run_simulation(params);
  const StalenessDecayReport report =
      staleness_decay_report(result.trace, params.schedule, 50);
  CHECK(report.first_window_mean == 0.0);
  CHECK(report.last_window_mean == 0.0);
  CHECK(report.premise_holds);

  StepSchedule constant;
  constant.kind = ScheduleKind::kConstant;
  const StalenessDecayReport flagged =
      staleness_decay_report(result.trace, constant, 50);
  CHECK_FALSE(flagged.premise_holds);
}

TEST_CASE("lossy channels with a diminishing schedule decay the staleness error") {
  SimulationParams params;
  params.objectives = make_quadratic_set(4, 2).to_objective_set();
  params.c = SimulationParams::common_c(4, 0.1);
  params.channel.p_success = 0.5;
  params.schedule.kind = ScheduleKind::kHybrid;
  params.schedule.gamma0 = 0.001;
  params.schedule.switch_tick = 5000;
  params.schedule.a = 50.0;
  params.schedule.b = 0.0;
  params.schedule.offset_at_switch = false;
  params.iterations = 20000;
  params.master_seed = 12;
  const SimulationResult result = run_simulation(params);
  REQUIRE(result.status == RunStatus::kOk);
  const StalenessDecayReport report =
      staleness_decay_report(result.trace, params.schedule, 1000);
  CHECK(report.premise_holds);
  CHECK(report.last_window_mean < report.first_window_mean);
}
