#include "lfsim/actuation.hpp"

#include <algorithm>
#include <cmath>

#include "lfsim/error.hpp"

namespace lfsim {

void ExpFilter::validate() const {
  if (!(alpha > 0.0) || alpha > 1.0) throw Error("filter alpha must lie in (0, 1]");
}

ExpFilterOutput exp_filter_step(const ExpFilter& filter, double input, OpCounter* ops) {
  ExpFilter next = filter;
  next.state = filter.alpha * input + (1.0 - filter.alpha) * filter.state;
  tally(ops, 4);
  return {next.state, next};
}

double effort_to_pwm(double effort, double channel_gain) {
  if (!(channel_gain > 0.0)) throw Error("effort_to_pwm: channel gain must be positive");
  if (std::isnan(effort)) throw Error("effort_to_pwm: effort is NaN");
  return std::clamp(kPwmNeutral + channel_gain * effort, kPwmMin, kPwmMax);
}

Actuation pwm_to_actuation(const ControlCommand& command, const VehicleParams& params) {
  const double steer = std::clamp(command.steering_pwm, kPwmMin, kPwmMax);
  const double throttle = std::clamp(command.throttle_pwm, kPwmMin, kPwmMax);
  return {params.max_steer_angle * (steer - kPwmNeutral) / kPwmNeutral,
          params.max_speed * std::max(0.0, throttle - kPwmNeutral) / kPwmNeutral};
}

}  // namespace lfsim
