#include "lfsim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/core.h>

#include "lfsim/error.hpp"

namespace lfsim {

namespace {

constexpr double kPi = std::numbers::pi;

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
         std::isfinite(s.speed);
}

void require_finite(const VehicleState& s, const char* who) {
  if (!finite(s)) {
    throw Error(fmt::format("{}: non-finite vehicle state ({}, {}, {}, {})", who, s.x,
                            s.y, s.heading, s.speed));
  }
}

double speed_at(std::span<const SpeedSegment> profile, double t) {
  double v = profile.front().speed;
  for (const auto& seg : profile) {
    if (seg.start_time <= t) v = seg.speed;
  }
  return v;
}

}  // namespace

void VehicleParams::validate() const {
  if (!(wheelbase > 0.0) || !(max_steer_angle > 0.0) || !(max_speed > 0.0) ||
      !(max_accel > 0.0)) {
    throw Error("vehicle parameters must all be strictly positive");
  }
  if (!(max_steer_angle < kPi / 2)) {
    throw Error("max_steer_angle must stay below pi/2");
  }
}

void LeaderScript::validate(double max_speed) const {
  if (speed_profile.empty()) throw Error("leader speed profile is empty");
  if (speed_profile.front().start_time != 0.0) {
    throw Error("leader speed profile must start at t = 0");
  }
  for (std::size_t i = 0; i < speed_profile.size(); ++i) {
    const auto& seg = speed_profile[i];
    if (!std::isfinite(seg.speed) || seg.speed < 0.0 || seg.speed > max_speed) {
      throw Error(fmt::format("leader speed {} outside [0, {}]", seg.speed, max_speed));
    }
    if (i > 0 && !(seg.start_time > speed_profile[i - 1].start_time)) {
      throw Error("leader speed profile times must be strictly increasing");
    }
  }
  require_finite(start, "leader start");
  if (kind == LeaderKind::waypoint_path) {
    if (waypoints.size() < 2) throw Error("waypoint path needs at least two points");
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
      if (waypoints[i] == waypoints[i - 1]) {
        throw Error(fmt::format("waypoints {} and {} coincide", i - 1, i));
      }
    }
  }
}

LeaderScript LeaderScript::stationary_at(const VehicleState& pose) {
  LeaderScript s;
  s.kind = LeaderKind::stationary;
  s.start = pose;
  s.start.speed = 0.0;
  return s;
}

LeaderScript LeaderScript::straight(const VehicleState& start, double speed) {
  LeaderScript s;
  s.kind = LeaderKind::straight_line;
  s.start = start;
  s.speed_profile = {{0.0, speed}};
  return s;
}

LeaderScript LeaderScript::path(std::vector<Point2> waypoints, double speed) {
  LeaderScript s;
  s.kind = LeaderKind::waypoint_path;
  s.speed_profile = {{0.0, speed}};
  if (waypoints.size() >= 2) {
    s.start.x = waypoints[0].x;
    s.start.y = waypoints[0].y;
    s.start.heading =
        std::atan2(waypoints[1].y - waypoints[0].y, waypoints[1].x - waypoints[0].x);
  }
  s.waypoints = std::move(waypoints);
  return s;
}

double normalize_angle(double angle) {
  if (angle >= -kPi && angle < kPi) return angle;
  double a = std::remainder(angle, 2.0 * kPi);
  if (a >= kPi) a -= 2.0 * kPi;
  if (a < -kPi) a += 2.0 * kPi;
  return a;
}

VehicleState step_bicycle(const VehicleState& state, const VehicleParams& params,
                          double steer_angle, double speed_cmd, double dt) {
  require_finite(state, "step_bicycle");
  if (!std::isfinite(steer_angle) || !std::isfinite(speed_cmd) || !std::isfinite(dt)) {
    throw Error("step_bicycle: non-finite command or timestep");
  }
  if (!(dt > 0.0)) throw Error("step_bicycle: dt must be positive");
  if (speed_cmd < 0.0) throw Error("step_bicycle: negative speed command");

  const double delta = std::clamp(steer_angle, -params.max_steer_angle, params.max_steer_angle);
  const double curvature = std::tan(delta) / params.wheelbase;

  const double v0 = std::clamp(state.speed, 0.0, params.max_speed);
  const double target = std::min(speed_cmd, params.max_speed);
  const double max_dv = params.max_accel * dt;
  const double dv = std::clamp(target - v0, -max_dv, max_dv);
  // Speed ramps linearly across the step, so v(tau) is exact inside RK4.
  const double ramp = dv / dt;

  struct Deriv {
    double dx, dy, dpsi;
  };
  auto f = [&](double tau, double psi) {
    const double v = v0 + ramp * tau;
    return Deriv{v * std::cos(psi), v * std::sin(psi), v * curvature};
  };

  const double psi0 = state.heading;
  const double h = dt;
  const Deriv k1 = f(0.0, psi0);
  const Deriv k2 = f(0.5 * h, psi0 + 0.5 * h * k1.dpsi);
  const Deriv k3 = f(0.5 * h, psi0 + 0.5 * h * k2.dpsi);
  const Deriv k4 = f(h, psi0 + h * k3.dpsi);

  VehicleState next;
  next.x = state.x + h / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
  next.y = state.y + h / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  next.heading =
      normalize_angle(psi0 + h / 6.0 * (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi));
  next.speed = std::clamp(v0 + dv, 0.0, params.max_speed);
  return next;
}

double distance_travelled(std::span<const SpeedSegment> profile, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double begin = profile[i].start_time;
    if (begin >= t) break;
    const double end = i + 1 < profile.size() ? std::min(profile[i + 1].start_time, t) : t;
    s += profile[i].speed * (end - begin);
  }
  return s;
}

VehicleState leader_pose(const LeaderScript& script, double t) {
  if (!std::isfinite(t)) throw Error("leader_pose: non-finite time");
  if (t < 0.0) throw Error("leader_pose: negative time");

  switch (script.kind) {
    case LeaderKind::stationary:
      return script.start;
    case LeaderKind::straight_line: {
      const double s = distance_travelled(script.speed_profile, t);
      VehicleState p = script.start;
      p.x += s * std::cos(p.heading);
      p.y += s * std::sin(p.heading);
      p.speed = speed_at(script.speed_profile, t);
      return p;
    }
    case LeaderKind::waypoint_path: {
      const auto& wp = script.waypoints;
      double remaining = distance_travelled(script.speed_profile, t);
      for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
        const double dx = wp[i + 1].x - wp[i].x;
        const double dy = wp[i + 1].y - wp[i].y;
        const double len = std::hypot(dx, dy);
        const double heading = std::atan2(dy, dx);
        if (remaining < len) {
          const double u = remaining / len;
          return {wp[i].x + u * dx, wp[i].y + u * dy, normalize_angle(heading),
                  speed_at(script.speed_profile, t)};
        }
        remaining -= len;
      }
      const auto& a = wp[wp.size() - 2];
      const auto& b = wp.back();
      return {b.x, b.y, normalize_angle(std::atan2(b.y - a.y, b.x - a.x)), 0.0};
    }
  }
  throw Error("leader_pose: unknown script kind");
}

std::vector<Point2> leader_track(const LeaderScript& script, double t, double lead_in) {
  const VehicleState& s0 =
      script.kind == LeaderKind::waypoint_path ? leader_pose(script, 0.0) : script.start;
  std::vector<Point2> track;
  track.push_back({s0.x - lead_in * std::cos(s0.heading), s0.y - lead_in * std::sin(s0.heading)});
  track.push_back({s0.x, s0.y});

  if (script.kind == LeaderKind::waypoint_path) {
    double remaining = distance_travelled(script.speed_profile, t);
    const auto& wp = script.waypoints;
    for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
      const double len = std::hypot(wp[i + 1].x - wp[i].x, wp[i + 1].y - wp[i].y);
      if (remaining < len) break;
      track.push_back(wp[i + 1]);
      remaining -= len;
    }
  }
  const VehicleState now = leader_pose(script, t);
  const Point2 here{now.x, now.y};
  if (!(here == track.back())) track.push_back(here);
  return track;
}

LateralDeviation lateral_deviation(const VehicleState& follower,
                                   std::span<const Point2> track) {
  if (track.empty()) throw Error("lateral_deviation: empty track");
  if (!finite(follower)) throw Error("lateral_deviation: non-finite follower state");

  const double px = follower.x;
  const double py = follower.y;
  double best = std::numeric_limits<double>::infinity();
  int side = 0;
  bool any_segment = false;

  // Unit direction of the non-degenerate segment starting at or after i
  // (forward) or ending at or before i (backward); zero when there is none.
  auto unit_dir = [&](std::size_t a, std::size_t b) {
    const double dx = track[b].x - track[a].x, dy = track[b].y - track[a].y;
    const double len = std::hypot(dx, dy);
    return len == 0.0 ? Point2{0.0, 0.0} : Point2{dx / len, dy / len};
  };
  auto neighbour_dir = [&](std::size_t vertex, bool forward) {
    if (forward) {
      for (std::size_t j = vertex; j + 1 < track.size(); ++j) {
        const auto d = unit_dir(j, j + 1);
        if (d.x != 0.0 || d.y != 0.0) return d;
      }
    } else {
      for (std::size_t j = vertex; j > 0; --j) {
        const auto d = unit_dir(j - 1, j);
        if (d.x != 0.0 || d.y != 0.0) return d;
      }
    }
    return Point2{0.0, 0.0};
  };
  auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };

  for (std::size_t i = 0; i + 1 < track.size(); ++i) {
    const double ax = track[i].x, ay = track[i].y;
    const double dx = track[i + 1].x - ax, dy = track[i + 1].y - ay;
    const double len2 = dx * dx + dy * dy;
    if (len2 == 0.0) continue;
    any_segment = true;
    const double u = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
    const double cx = ax + u * dx, cy = ay + u * dy;
    const double d = std::hypot(px - cx, py - cy);
    if (d < best) {
      best = d;
      side = sign(dx * (py - ay) - dy * (px - ax));
      // Nearest point on a vertex shared by two segments: judge the side
      // against the mean of both directions so the answer does not depend on
      // which segment won the distance tie.
      const bool at_end = u == 1.0 && i + 2 < track.size();
      const bool at_start = u == 0.0 && i > 0;
      if (at_end || at_start) {
        const std::size_t v = at_end ? i + 1 : i;
        const auto in = neighbour_dir(v, false);
        const auto out = neighbour_dir(v, true);
        const double tx = in.x + out.x, ty = in.y + out.y;
        if (tx != 0.0 || ty != 0.0) side = sign(tx * (py - cy) - ty * (px - cx));
      }
    }
  }

  if (!any_segment) {
    return {std::hypot(px - track.front().x, py - track.front().y), 0};
  }
  if (best == 0.0) side = 0;
  return {best, side};
}

double following_distance(const VehicleState& follower, const VehicleState& leader) {
  if (!finite(follower) || !finite(leader)) {
    throw Error("following_distance: non-finite state");
  }
  return std::hypot(leader.x - follower.x, leader.y - follower.y);
}

}  // namespace lfsim
