#pragma once

#include "lfsim/op_counter.hpp"

namespace lfsim {

struct PidConfig {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double output_limit = 1.0;
  // Bound on |ki * integral|.
  double integral_limit = 1.0;
  // Weight of the newest raw derivative sample; 1 disables smoothing.
  double derivative_filter_alpha = 1.0;

  void validate() const;
};

struct PidState {
  double integral = 0.0;
  double prev_measurement = 0.0;
  double filtered_derivative = 0.0;
  // False until the first sample, so the first step has no derivative kick.
  bool primed = false;

  bool operator==(const PidState&) const = default;
};

struct PidOutput {
  double effort = 0.0;
  PidState state;
};

// Positional PID with derivative on measurement, a first-order filter on the
// derivative, clamping anti-windup and symmetric output saturation.
PidOutput pid_step(const PidConfig& config, const PidState& state, double error,
                   double measurement, double dt, OpCounter* ops = nullptr);

}  // namespace lfsim
