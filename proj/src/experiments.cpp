#include "lfsim/experiments.hpp"

#include <chrono>
#include <cmath>
#include <future>

#include <fmt/core.h>

#include "lfsim/actuation.hpp"
#include "lfsim/error.hpp"

namespace lfsim {

namespace {

// Per-channel controller memory for one run.
struct ChannelRuntime {
  PidState pid;
  ExpFilter filter;
  double prev_error = 0.0;
  bool primed = false;

  // Called after a detection gap so the first sample back does not produce
  // a derivative spike from stale history.
  void forget_rate() {
    pid.primed = false;
    primed = false;
  }
};

ChannelRuntime make_runtime(const ChannelSetup& setup) {
  ChannelRuntime rt;
  if (setup.kind == ControllerKind::pid && setup.pid) {
    rt.filter.alpha = setup.pid->output_filter_alpha;
  } else if (setup.fuzzy) {
    rt.filter.alpha = setup.fuzzy->output_filter_alpha;
  }
  return rt;
}

double channel_effort(const ChannelSetup& setup, ChannelRuntime& rt, double error,
                      double period, OpCounter& ops) {
  double effort = 0.0;
  if (setup.kind == ControllerKind::pid) {
    // Setpoints are fixed, so the measurement is the negated error.
    const auto out = pid_step(setup.pid->gains, rt.pid, error, -error, period, &ops);
    rt.pid = out.state;
    effort = out.effort;
  } else {
    const double delta = rt.primed ? (error - rt.prev_error) / period : 0.0;
    ops.add(rt.primed ? 2 : 0);
    effort = fuzzy_step(setup.fuzzy->rules, error, delta, &ops);
  }
  rt.prev_error = error;
  rt.primed = true;

  if (rt.filter.alpha < 1.0) {
    const auto f = exp_filter_step(rt.filter, effort, &ops);
    rt.filter = f.filter;
    effort = f.value;
  }
  return effort;
}

std::string label_for(const ScenarioConfig& c) {
  const auto s = to_string(c.steering.kind);
  const auto t = to_string(c.throttle.kind);
  if (c.steering.locked) return std::string(t);
  if (c.throttle.locked || s == t) return std::string(s);
  return fmt::format("{}/{}", s, t);
}

VehicleState behind(const VehicleState& pose, double gap, double left) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  return {pose.x - gap * c - left * s, pose.y - gap * s + left * c, pose.heading, 0.0};
}

}  // namespace

Trace run_scenario(const ScenarioConfig& config) {
  config.validate();

  Trace trace;
  trace.scenario = config.name;
  trace.label = label_for(config);
  trace.config = config;

  const std::size_t n = config.record_count();
  const int frame_steps = config.frame_steps();
  const double period = frame_steps * config.dt;
  const int substeps = config.physics_substeps();
  const double h = config.dt / substeps;
  const double half_width = config.camera.image_width / 2.0;

  trace.records.reserve(n);

  VehicleState follower = config.follower_start;
  follower.heading = normalize_angle(follower.heading);
  ControlCommand command;
  ChannelRuntime steer_rt = make_runtime(config.steering);
  ChannelRuntime throttle_rt = make_runtime(config.throttle);
  PixelJitter jitter(config.seed, config.camera.jitter_px);

  bool detected = false;
  double px_err = 0.0;
  double area_err = 0.0;
  bool moved = false;
  double stalled_for = 0.0;
  const bool stall_rule =
      config.stop_when_stalled && config.leader.kind == LeaderKind::stationary;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    const VehicleState leader = leader_pose(config.leader, t);

    TraceRecord rec;
    rec.t = t;
    rec.leader = leader;
    rec.follower = follower;

    if (i % static_cast<std::size_t>(frame_steps) == 0) {
      const auto reading = observe(config.camera, follower, leader, config.panel, t, &jitter);
      if (reading) {
        const bool regained = !detected;
        detected = true;
        px_err = pixel_error_x(*reading, config.camera);
        area_err = area_error(*reading, config.setpoint_area);
        if (regained) {
          steer_rt.forget_rate();
          throttle_rt.forget_rate();
        }

        OpCounter ops;
        const auto start = std::chrono::steady_clock::now();
        if (!config.steering.locked) {
          const double e = px_err / half_width;
          ops.add(1);
          command.steering_pwm = effort_to_pwm(
              channel_effort(config.steering, steer_rt, e, period, ops), config.steering.pwm_gain);
          ops.add(4);
        }
        if (!config.throttle.locked) {
          const double e = area_err / config.setpoint_area;
          ops.add(1);
          command.throttle_pwm = effort_to_pwm(
              channel_effort(config.throttle, throttle_rt, e, period, ops), config.throttle.pwm_gain);
          ops.add(4);
        }
        const auto stop = std::chrono::steady_clock::now();
        rec.loop_cost_us = std::chrono::duration<double, std::micro>(stop - start).count();
        rec.op_count = ops.count;
        rec.reading = reading;
      } else {
        detected = false;
        if (config.lost_target == LostTargetPolicy::stop) command.throttle_pwm = kPwmNeutral;
      }
    }

    rec.detected = detected;
    rec.pixel_error_x = px_err;
    rec.area_error = area_err;
    rec.steering_pwm = command.steering_pwm;
    rec.throttle_pwm = command.throttle_pwm;
    const auto track = leader_track(config.leader, t, config.track_lead_in);
    rec.lateral_dev = lateral_deviation(follower, track).signed_distance();
    rec.follow_dist = following_distance(follower, leader);
    trace.records.push_back(rec);

    if (stall_rule) {
      if (follower.speed >= config.stall_speed) {
        moved = true;
        stalled_for = 0.0;
      } else if (moved) {
        stalled_for += config.dt;
        if (stalled_for >= config.stall_time - 1e-9) {
          trace.stop_reason = "stalled";
          break;
        }
      }
    }

    const Actuation act = pwm_to_actuation(command, config.vehicle);
    for (int k = 0; k < substeps; ++k) {
      follower = step_bicycle(follower, config.vehicle, -act.steer_angle, act.speed_cmd, h);
    }
  }
  return trace;
}

std::vector<Trace> run_step_response(const ScenarioConfig& base,
                                     std::span<const double> separations) {
  std::vector<ScenarioConfig> configs;
  for (double sep : separations) {
    if (!(sep > base.camera.min_range)) {
      throw Error(fmt::format("separation {} m is inside the camera's minimum range {} m", sep,
                              base.camera.min_range));
    }
    if (sep > base.camera.max_range) {
      throw Error(fmt::format("separation {} m is beyond the camera's maximum range {} m", sep,
                              base.camera.max_range));
    }
    ScenarioConfig c = base;
    c.name = fmt::format("{}_sep{:g}", base.name, sep);
    c.archetype = Archetype::closed_loop;
    c.leader = LeaderScript::stationary_at(base.leader.start);
    c.follower_start = behind(c.leader.start, sep + base.panel.mount_offset, 0.0);
    c.steering.locked = true;
    c.stop_when_stalled = false;
    c.validate();
    configs.push_back(std::move(c));
  }

  std::vector<std::future<Trace>> jobs;
  for (const auto& c : configs) {
    jobs.push_back(std::async(std::launch::async, [&c] { return run_scenario(c); }));
  }
  std::vector<Trace> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

Trace run_lateral_offset(const ScenarioConfig& base, double offset, double leader_speed) {
  if (offset == 0.0 || !std::isfinite(offset)) {
    throw Error("run_lateral_offset: offset must be non-zero");
  }
  ScenarioConfig c = base;
  c.archetype = Archetype::closed_loop;
  c.leader = leader_speed == 0.0 ? LeaderScript::stationary_at(base.leader.start)
                                 : LeaderScript::straight(base.leader.start, leader_speed);
  c.follower_start = behind(c.leader.start, base.separation, offset);
  return run_scenario(c);
}

Trace run_path_follow(const ScenarioConfig& base, const LeaderScript& path) {
  if (path.kind != LeaderKind::waypoint_path && path.kind != LeaderKind::straight_line) {
    throw Error("run_path_follow: path must be a straight_line or waypoint_path script");
  }
  ScenarioConfig c = base;
  c.archetype = Archetype::closed_loop;
  c.leader = path;
  if (path.kind == LeaderKind::waypoint_path) {
    path.validate(base.vehicle.max_speed);
    c.leader.start = leader_pose(path, 0.0);
  }
  c.follower_start = behind(c.leader.start, base.separation, 0.0);
  return run_scenario(c);
}

std::vector<Trace> run_archetype(const ScenarioConfig& config) {
  config.validate();
  switch (config.archetype) {
    case Archetype::closed_loop:
      return {run_scenario(config)};
    case Archetype::step_response:
      return run_step_response(config, config.separations);
    case Archetype::lateral_offset:
      return {run_lateral_offset(config, config.lateral_offset, config.leader_speed)};
    case Archetype::path_follow:
      return {run_path_follow(config, config.leader)};
  }
  throw Error("unknown archetype");
}

ScenarioConfig with_controllers(const ScenarioConfig& config, ControllerKind kind) {
  ScenarioConfig c = config;
  c.steering.kind = kind;
  c.throttle.kind = kind;
  return c;
}

}  // namespace lfsim
