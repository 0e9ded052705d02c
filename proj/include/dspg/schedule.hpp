#pragma once

#include <cstdint>

namespace dspg {

enum class ScheduleKind { kConstant, kDiminishing, kHybrid };

// Step-size schedule indexed by an agent's local update count, never by the
// global tick. Emitted values always lie in [0, 1].
//
//   constant:     gamma0
//   diminishing:  a / (n + b)
//   hybrid:       gamma0 until switch_tick, then the diminishing tail. With
//                 offset_at_switch the tail restarts its clock at the switch,
//                 a / (n - switch_tick + b); without it the tail reads the
//                 local clock directly, a / (n + b), which keeps the 1/n decay
//                 anchored to the run's own iteration count.
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::kConstant;
  double gamma0 = 0.001;
  std::int64_t switch_tick = 0;
  double a = 1.0;
  double b = 100.0;
  bool offset_at_switch = true;

  void validate() const;

  double at(std::int64_t local_clock) const {
    switch (kind) {
      case ScheduleKind::kConstant:
        return gamma0;
      case ScheduleKind::kDiminishing:
        return a / (static_cast<double>(local_clock) + b);
      case ScheduleKind::kHybrid:
      default:
        if (local_clock < switch_tick) {
          return gamma0;
        }
        const double n = offset_at_switch
                             ? static_cast<double>(local_clock - switch_tick)
                             : static_cast<double>(local_clock);
        return a / (n + b);
    }
  }

  bool diminishes() const noexcept { return kind != ScheduleKind::kConstant; }
};

inline double step_size(const StepSchedule& schedule, std::int64_t local_clock) {
  return schedule.at(local_clock);
}

}  // namespace dspg
