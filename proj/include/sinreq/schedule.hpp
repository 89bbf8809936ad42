#pragma once

#include <cstdint>

namespace sinreq {

enum class ScheduleKind { Constant, Exponential };

// Regularisation strength as a function of the optimizer step.
struct LambdaSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double start_value = 1.0;
  double end_value = 1.0;
  std::int64_t horizon = 1;

  static LambdaSchedule constant(double value) { return {ScheduleKind::Constant, value, value, 1}; }
  static LambdaSchedule exponential(double start, double end, std::int64_t horizon) {
    return {ScheduleKind::Exponential, start, end, horizon};
  }

  friend bool operator==(const LambdaSchedule&, const LambdaSchedule&) = default;
};

void validate(const LambdaSchedule& s);

// Constant: start_value. Exponential: geometric interpolation
// start * (end / start)^(t / T), held at end_value for t >= T.
double lambda_at(const LambdaSchedule& s, std::int64_t step);

}  // namespace sinreq
