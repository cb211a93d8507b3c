#include "lfsim/pid.hpp"

#include <algorithm>
#include <cmath>

#include "lfsim/error.hpp"

namespace lfsim {

void PidConfig::validate() const {
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
    throw Error("pid gains must be finite");
  }
  if (!(output_limit > 0.0) || !std::isfinite(output_limit)) {
    throw Error("pid output_limit must be positive");
  }
  if (!(integral_limit > 0.0) || integral_limit > output_limit) {
    throw Error("pid integral_limit must lie in (0, output_limit]");
  }
  if (!(derivative_filter_alpha > 0.0) || derivative_filter_alpha > 1.0) {
    throw Error("pid derivative_filter_alpha must lie in (0, 1]");
  }
}

PidOutput pid_step(const PidConfig& config, const PidState& state, double error,
                   double measurement, double dt, OpCounter* ops) {
  if (!std::isfinite(error) || !std::isfinite(measurement) || !std::isfinite(dt)) {
    throw Error("pid_step: non-finite input");
  }
  if (!(dt > 0.0)) throw Error("pid_step: dt must be positive");

  PidState next = state;

  next.integral += error * dt;
  tally(ops, 2);
  if (config.ki != 0.0) {
    const double bound = config.integral_limit / std::abs(config.ki);
    next.integral = std::clamp(next.integral, -bound, bound);
    tally(ops, 3);
  }

  const double raw_derivative = state.primed ? (measurement - state.prev_measurement) / dt : 0.0;
  const double a = config.derivative_filter_alpha;
  next.filtered_derivative = a * raw_derivative + (1.0 - a) * state.filtered_derivative;
  next.prev_measurement = measurement;
  next.primed = true;
  tally(ops, 6);

  const double effort = config.kp * error + config.ki * next.integral -
                        config.kd * next.filtered_derivative;
  tally(ops, 5);

  const double saturated = std::clamp(effort, -config.output_limit, config.output_limit);
  tally(ops, 2);
  return {saturated, next};
}

}  // namespace lfsim
