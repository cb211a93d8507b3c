#pragma once

#include "lfsim/op_counter.hpp"
#include "lfsim/world.hpp"

namespace lfsim {

inline constexpr double kPwmNeutral = 90.0;
inline constexpr double kPwmMin = 0.0;
inline constexpr double kPwmMax = 180.0;

// First-order low-pass: out = alpha * in + (1 - alpha) * previous out.
struct ExpFilter {
  double alpha = 1.0;
  double state = 0.0;

  void validate() const;
};

struct ExpFilterOutput {
  double value = 0.0;
  ExpFilter filter;
};

ExpFilterOutput exp_filter_step(const ExpFilter& filter, double input, OpCounter* ops = nullptr);

// Servo-style commands. 90 is neutral on both channels; steering above 90
// turns right, below 90 turns left. Throttle below 90 means "brake" and
// never reverses the vehicle.
struct ControlCommand {
  double steering_pwm = kPwmNeutral;
  double throttle_pwm = kPwmNeutral;

  bool operator==(const ControlCommand&) const = default;
};

double effort_to_pwm(double effort, double channel_gain);

struct Actuation {
  // Right-positive, matching the PWM convention. The world model measures
  // heading counterclockwise, so the runner feeds -steer_angle to it.
  double steer_angle = 0.0;
  double speed_cmd = 0.0;
};

Actuation pwm_to_actuation(const ControlCommand& command, const VehicleParams& params);

}  // namespace lfsim
