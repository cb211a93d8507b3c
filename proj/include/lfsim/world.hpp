#pragma once

#include <span>
#include <vector>

namespace lfsim {

// Planar pose and forward speed of one vehicle. Heading is counterclockwise
// from +x and kept in [-pi, pi).
struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  bool operator==(const VehicleState&) const = default;
};

struct VehicleParams {
  double wheelbase = 0.33;
  double max_steer_angle = 0.45;
  double max_speed = 4.0;
  double max_accel = 2.0;

  // Throws lfsim::Error when any field is non-positive or the steer limit
  // reaches pi/2.
  void validate() const;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

// Piecewise-constant speed schedule. Each segment starts at `start_time` and
// lasts until the next one; the first segment must start at t = 0.
struct SpeedSegment {
  double start_time = 0.0;
  double speed = 0.0;

  bool operator==(const SpeedSegment&) const = default;
};

enum class LeaderKind { stationary, straight_line, waypoint_path };

struct LeaderScript {
  LeaderKind kind = LeaderKind::stationary;
  std::vector<SpeedSegment> speed_profile{{0.0, 0.0}};
  VehicleState start;
  // Used only by waypoint_path. The start pose is not implicitly prepended;
  // the path begins at waypoints.front().
  std::vector<Point2> waypoints;

  void validate(double max_speed) const;

  static LeaderScript stationary_at(const VehicleState& pose);
  static LeaderScript straight(const VehicleState& start, double speed);
  static LeaderScript path(std::vector<Point2> waypoints, double speed);
};

double normalize_angle(double angle);

// Advances one vehicle by dt seconds with rear-axle bicycle kinematics
// (yaw rate v tan(delta) / L) integrated by a single RK4 step. The steering
// angle is clamped to the vehicle's limit and speed ramps linearly toward
// speed_cmd at no more than max_accel.
VehicleState step_bicycle(const VehicleState& state, const VehicleParams& params,
                          double steer_angle, double speed_cmd, double dt);

VehicleState leader_pose(const LeaderScript& script, double t);

// Distance covered by the speed profile over [0, t].
double distance_travelled(std::span<const SpeedSegment> profile, double t);

// Polyline the leader has traced up to time t, preceded by a point
// `lead_in` metres behind its start pose so that a follower queued behind a
// stationary leader still has a track to align with.
std::vector<Point2> leader_track(const LeaderScript& script, double t, double lead_in);

struct LateralDeviation {
  double distance = 0.0;
  // +1 when the follower is left of the track direction, -1 right, 0 when
  // the track has no direction (all points coincide).
  int side = 0;

  double signed_distance() const { return side * distance; }
};

LateralDeviation lateral_deviation(const VehicleState& follower,
                                   std::span<const Point2> track);

double following_distance(const VehicleState& follower, const VehicleState& leader);

}  // namespace lfsim
