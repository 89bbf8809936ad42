#include "sinreq/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sinreq/errors.hpp"

namespace sinreq {

void validate(const LambdaSchedule& s) {
  if (!std::isfinite(s.start_value) || s.start_value < 0.0) {
    throw ParameterError("schedule start value must be finite and non-negative");
  }
  if (s.kind == ScheduleKind::Exponential) {
    if (!(s.start_value > 0.0) || !(s.end_value > 0.0) || !std::isfinite(s.end_value)) {
      throw ParameterError("exponential schedule needs positive finite endpoints");
    }
    if (s.horizon <= 0) throw ParameterError("exponential schedule horizon must be positive");
  }
}

double lambda_at(const LambdaSchedule& s, std::int64_t step) {
  validate(s);
  if (step < 0) throw ParameterError("schedule step must be non-negative, got " + std::to_string(step));
  if (s.kind == ScheduleKind::Constant) return s.start_value;
  if (step == 0) return s.start_value;
  if (step >= s.horizon) return s.end_value;
  const double frac = static_cast<double>(step) / static_cast<double>(s.horizon);
  return s.start_value * std::pow(s.end_value / s.start_value, frac);
}

}  // namespace sinreq
