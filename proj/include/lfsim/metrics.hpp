#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "lfsim/trace.hpp"

namespace lfsim {

// Numeric value of a trace CSV column for one record. Throws on names that
// are not in the schema.
double column_value(const TraceRecord& record, std::string_view column);
bool is_column(std::string_view column);
// PWM column that drives the given error column (steering for pixel and
// lateral errors, throttle for area and distance).
std::string_view pwm_column_for(std::string_view signal);

// How a signal is expected to move: from `baseline` to baseline +
// setpoint_delta. For an error column that should be driven to zero,
// baseline is its initial value and setpoint_delta its negation.
struct StepSpec {
  std::string signal = "area_error";
  double setpoint_delta = 1.0;
  double baseline = 0.0;
  double rise_low = 0.1;
  double rise_high = 0.9;
  double settle_band = 0.05;
  double steady_window = 0.2;
};

struct MetricSet {
  // Absent when not applicable: the signal never completes the rise, never
  // settles, or there is no step at all.
  std::optional<double> rise_time;
  std::optional<double> settling_time;
  std::optional<double> overshoot;  // percent of |setpoint_delta|
  double steady_state_error = 0.0;  // mean |signal - target| over the final window
  double rms_error = 0.0;           // about the target, whole trace
  double control_effort_tv = 0.0;   // total variation of the driving PWM
  double mean_loop_cost = 0.0;      // microseconds per record
  double mean_op_count = 0.0;       // arithmetic operations per record
};

inline constexpr std::array<std::string_view, 8> kMetricNames = {
    "rise_time",         "settling_time",  "overshoot",     "steady_state_error",
    "rms_error",         "control_effort_tv", "mean_loop_cost", "mean_op_count"};

std::optional<double> metric_value(const MetricSet& m, std::string_view name);

// Step-response analysis. Crossing times are linearly interpolated between
// records; times are measured from the first record. Needs at least five
// records so the final window is non-empty.
MetricSet step_metrics(const Trace& trace, const StepSpec& spec);

// Initial errors at or below this magnitude (signal units) count as no step.
inline constexpr double kZeroStep = 1e-6;

// Treats `signal` as an error to be regulated to zero from its first value.
// A zero first value is a zero step: rise, settling and overshoot are
// reported as absent and the remaining metrics are computed about zero.
MetricSet error_metrics(const Trace& trace, std::string_view signal);

// Error column the scenario is judged on: area_error for step tests,
// pixel_error_x otherwise.
std::string_view primary_signal(const Trace& trace);

}  // namespace lfsim
