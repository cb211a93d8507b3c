#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfsim/scenario.hpp"
#include "lfsim/sensor.hpp"
#include "lfsim/world.hpp"

namespace lfsim {

struct TraceRecord {
  double t = 0.0;
  VehicleState leader;
  VehicleState follower;
  // Present only on records where a camera frame produced a detection.
  std::optional<SensorReading> reading;
  // Whether the controllers currently hold a valid detection. Between frames
  // this carries the status of the latest frame.
  bool detected = false;
  double pixel_error_x = 0.0;
  double area_error = 0.0;
  double steering_pwm = 90.0;
  double throttle_pwm = 90.0;
  double lateral_dev = 0.0;
  double follow_dist = 0.0;
  // Wall-clock cost of the control computation on this record, microseconds.
  double loop_cost_us = 0.0;
  std::uint64_t op_count = 0;
};

struct Trace {
  std::string scenario;
  // "pid", "fuzzy", or "steering-kind/throttle-kind" when mixed.
  std::string label;
  ScenarioConfig config;
  std::vector<TraceRecord> records;
  // Empty when the run reached its full duration.
  std::string stop_reason;
};

}  // namespace lfsim
