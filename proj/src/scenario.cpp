#include "lfsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/core.h>

#include "lfsim/error.hpp"

namespace lfsim {

std::string_view to_string(Channel c) {
  return c == Channel::steering ? "steering" : "throttle";
}

std::string_view to_string(ControllerKind k) { return k == ControllerKind::pid ? "pid" : "fuzzy"; }

std::string_view to_string(Archetype a) {
  switch (a) {
    case Archetype::closed_loop: return "closed_loop";
    case Archetype::step_response: return "step_response";
    case Archetype::lateral_offset: return "lateral_offset";
    case Archetype::path_follow: return "path_follow";
  }
  return "?";
}

std::string_view to_string(LostTargetPolicy p) {
  return p == LostTargetPolicy::hold ? "hold" : "stop";
}

PidChannelConfig default_pid(Channel channel) {
  PidChannelConfig c;
  if (channel == Channel::steering) {
    c.gains = {.kp = 0.6, .ki = 0.05, .kd = 0.02, .output_limit = 1.0,
               .integral_limit = 0.3, .derivative_filter_alpha = 0.5};
  } else {
    // No integral action by default: the vehicle cannot reverse, so any
    // integral built up while closing in winds against the brake floor.
    c.gains = {.kp = 1.1, .ki = 0.0, .kd = 4.0, .output_limit = 1.0,
               .integral_limit = 0.05, .derivative_filter_alpha = 0.5};
  }
  return c;
}

FuzzyChannelConfig default_fuzzy(Channel channel) {
  FuzzyChannelConfig c;
  if (channel == Channel::steering) {
    c.rules = FuzzyConfig::standard(1.0, 4.0);
  } else {
    c.rules = FuzzyConfig::standard(1.0, 0.5);
  }
  c.output_filter_alpha = 0.3;
  return c;
}

int ScenarioConfig::frame_steps() const {
  return static_cast<int>(std::lround(1.0 / (camera.frame_rate * dt)));
}

int ScenarioConfig::physics_substeps() const {
  return std::max(1, static_cast<int>(std::ceil(dt / max_physics_step - 1e-9)));
}

std::size_t ScenarioConfig::record_count() const {
  return static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
}

namespace {

void validate_channel(const ChannelSetup& ch, Channel which) {
  const auto name = to_string(which);
  if (!(ch.pwm_gain > 0.0)) throw Error(fmt::format("{} pwm_gain must be positive", name));
  if (ch.pid) {
    ch.pid->gains.validate();
    if (!(ch.pid->output_filter_alpha > 0.0) || ch.pid->output_filter_alpha > 1.0) {
      throw Error(fmt::format("pid.{}.output_filter_alpha must lie in (0, 1]", name));
    }
  }
  if (ch.fuzzy) {
    ch.fuzzy->rules.validate();
    if (!(ch.fuzzy->output_filter_alpha > 0.0) || ch.fuzzy->output_filter_alpha > 1.0) {
      throw Error(fmt::format("fuzzy.{}.output_filter_alpha must lie in (0, 1]", name));
    }
  }
  if (!ch.locked) {
    if (ch.kind == ControllerKind::pid && !ch.pid) {
      throw Error(fmt::format("{} channel uses pid but no pid.{} config is defined", name, name));
    }
    if (ch.kind == ControllerKind::fuzzy && !ch.fuzzy) {
      throw Error(
          fmt::format("{} channel uses fuzzy but no fuzzy.{} config is defined", name, name));
    }
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  if (name.empty()) throw Error("scenario name is empty");
  if (name.find_first_of("/\\") != std::string::npos) {
    throw Error("scenario name must not contain path separators");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dt must be positive");
  if (!(duration >= dt) || !std::isfinite(duration)) throw Error("duration must be at least dt");
  if (duration / dt > 1e7) throw Error("duration / dt exceeds 1e7 steps");
  if (!(max_physics_step > 0.0)) throw Error("max_physics_step must be positive");

  vehicle.validate();
  camera.validate();
  panel.validate();
  leader.validate(vehicle.max_speed);
  if (!std::isfinite(follower_start.x) || !std::isfinite(follower_start.y) ||
      !std::isfinite(follower_start.heading) || !std::isfinite(follower_start.speed) ||
      follower_start.speed < 0.0 || follower_start.speed > vehicle.max_speed) {
    throw Error("follower start state is invalid");
  }

  const double frame_period = 1.0 / camera.frame_rate;
  const int k = frame_steps();
  if (k < 1 || std::abs(k * dt - frame_period) > 1e-9 * frame_period) {
    throw Error(fmt::format("camera frame period {} s is not a whole multiple of dt {} s",
                            frame_period, dt));
  }

  if (!(setpoint_area > 0.0)) throw Error("setpoint_area must be positive");
  validate_channel(steering, Channel::steering);
  validate_channel(throttle, Channel::throttle);
  if (!(stall_speed >= 0.0) || !(stall_time > 0.0)) throw Error("stall thresholds invalid");
  if (!(steady_state_threshold_px >= 0.0)) throw Error("steady-state threshold invalid");
  if (!(track_lead_in >= 0.0)) throw Error("track lead-in must be non-negative");

  switch (archetype) {
    case Archetype::step_response:
      if (separations.empty()) throw Error("step_response needs at least one separation");
      break;
    case Archetype::lateral_offset:
      if (lateral_offset == 0.0) throw Error("lateral_offset archetype needs a non-zero offset");
      if (leader_speed < 0.0 || leader_speed > vehicle.max_speed) {
        throw Error("lateral.leader_speed outside [0, max_speed]");
      }
      break;
    case Archetype::path_follow:
      if (leader.kind == LeaderKind::stationary) {
        throw Error("path_follow needs a straight_line or waypoint_path leader");
      }
      break;
    case Archetype::closed_loop:
      break;
  }
  if (!(separation > 0.0)) throw Error("follower.separation must be positive");
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  for (Channel ch : {Channel::steering, Channel::throttle}) {
    c.channel(ch).pid = default_pid(ch);
    c.channel(ch).fuzzy = default_fuzzy(ch);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(fmt::format("'{}' is not a finite number", s));
  }
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(fmt::format("'{}' is not a non-negative integer", s));
  }
  return v;
}

int to_int(std::string_view s) {
  const auto v = to_u64(s);
  if (v > 1'000'000'000ULL) throw Error(fmt::format("'{}' is too large", s));
  return static_cast<int>(v);
}

bool to_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(fmt::format("'{}' is not a boolean", s));
}

std::vector<double> to_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto part : split(s, ',')) {
    if (part.empty()) throw Error("empty entry in number list");
    out.push_back(to_double(part));
  }
  return out;
}

ControllerKind to_kind(std::string_view s) {
  if (s == "pid") return ControllerKind::pid;
  if (s == "fuzzy") return ControllerKind::fuzzy;
  throw Error(fmt::format("unknown controller kind '{}'", s));
}

// "NL:-1,-1,-0.5; NS:-1,-0.5,0" -> triangles (3 numbers) or trapezoids (4).
std::vector<FuzzySet> to_sets(std::string_view s) {
  std::vector<FuzzySet> sets;
  for (auto entry : split(s, ';')) {
    if (entry.empty()) continue;
    const auto colon = entry.find(':');
    if (colon == std::string_view::npos) {
      throw Error(fmt::format("fuzzy set '{}' lacks 'LABEL:' prefix", entry));
    }
    const std::string label(trim(entry.substr(0, colon)));
    const auto pts = to_doubles(entry.substr(colon + 1));
    if (pts.size() == 3) {
      sets.push_back({label, MembershipFunction::triangle(pts[0], pts[1], pts[2])});
    } else if (pts.size() == 4) {
      sets.push_back({label, MembershipFunction::trapezoid(pts[0], pts[1], pts[2], pts[3])});
    } else {
      throw Error(fmt::format("fuzzy set '{}' needs 3 or 4 breakpoints", label));
    }
  }
  if (sets.empty()) throw Error("empty fuzzy set list");
  return sets;
}

std::size_t index_of(const std::vector<FuzzySet>& sets, std::string_view label) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].label == label) return i;
  }
  throw Error(fmt::format("rule references unknown output label '{}'", label));
}

// Rows separated by ';', one row per error set, one label per delta set.
std::vector<std::size_t> to_rules(std::string_view s, const FuzzyConfig& cfg) {
  std::vector<std::size_t> rules;
  const auto rows = split(s, ';');
  if (rows.size() != cfg.error_sets.size()) {
    throw Error(fmt::format("rule table has {} rows, expected {}", rows.size(),
                            cfg.error_sets.size()));
  }
  for (auto row : rows) {
    std::istringstream in{std::string(row)};
    std::string label;
    std::size_t n = 0;
    while (in >> label) {
      rules.push_back(index_of(cfg.output_sets, label));
      ++n;
    }
    if (n != cfg.delta_sets.size()) {
      throw Error(fmt::format("rule row '{}' has {} entries, expected {}", row, n,
                              cfg.delta_sets.size()));
    }
  }
  return rules;
}

std::vector<SpeedSegment> to_profile(std::string_view s) {
  std::vector<SpeedSegment> out;
  for (auto entry : split(s, ',')) {
    const auto colon = entry.find(':');
    if (colon == std::string_view::npos) {
      throw Error(fmt::format("speed profile entry '{}' must be TIME:SPEED", entry));
    }
    out.push_back({to_double(entry.substr(0, colon)), to_double(entry.substr(colon + 1))});
  }
  return out;
}

std::vector<Point2> to_points(std::string_view s) {
  std::vector<Point2> out;
  for (auto entry : split(s, ';')) {
    if (entry.empty()) continue;
    const auto xy = to_doubles(entry);
    if (xy.size() != 2) throw Error(fmt::format("waypoint '{}' must be X,Y", entry));
    out.push_back({xy[0], xy[1]});
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view)>;

struct KeyDef {
  std::string doc;
  Setter set;
  // Set lists and rule tables are applied after scalar keys so that they
  // override any *_span regeneration regardless of file order.
  int pass = 0;
};

PidChannelConfig& pid_of(ScenarioConfig& c, Channel ch) {
  auto& slot = c.channel(ch).pid;
  if (!slot) slot = default_pid(ch);
  return *slot;
}

FuzzyChannelConfig& fuzzy_of(ScenarioConfig& c, Channel ch) {
  auto& slot = c.channel(ch).fuzzy;
  if (!slot) slot = default_fuzzy(ch);
  return *slot;
}

const std::map<std::string, KeyDef>& registry() {
  static const std::map<std::string, KeyDef> keys = [] {
    std::map<std::string, KeyDef> k;
    auto num = [&k](std::string key, std::string doc, double ScenarioConfig::*field) {
      k[std::move(key)] = {std::move(doc),
                           [field](ScenarioConfig& c, std::string_view v) { c.*field = to_double(v); }};
    };

    k["name"] = {"scenario name; output files are named after it",
                 [](ScenarioConfig& c, std::string_view v) { c.name = std::string(v); }};
    k["archetype"] = {"closed_loop | step_response | lateral_offset | path_follow",
                      [](ScenarioConfig& c, std::string_view v) {
                        if (v == "closed_loop") c.archetype = Archetype::closed_loop;
                        else if (v == "step_response") c.archetype = Archetype::step_response;
                        else if (v == "lateral_offset") c.archetype = Archetype::lateral_offset;
                        else if (v == "path_follow") c.archetype = Archetype::path_follow;
                        else throw Error(fmt::format("unknown archetype '{}'", v));
                      }};
    num("dt", "record (and camera-aligned) time step, seconds", &ScenarioConfig::dt);
    num("duration", "run length, seconds", &ScenarioConfig::duration);
    k["seed"] = {"seed for the optional pixel jitter",
                 [](ScenarioConfig& c, std::string_view v) { c.seed = to_u64(v); }};
    num("physics.max_step", "largest physics sub-step, seconds",
        &ScenarioConfig::max_physics_step);
    num("setpoint_area", "desired blob area, pixels^2", &ScenarioConfig::setpoint_area);
    k["setpoint_range"] = {
        "alternative to setpoint_area: following distance in metres, converted with the "
        "head-on projection of the configured camera and panel",
        [](ScenarioConfig& c, std::string_view v) {
          const double range = to_double(v);
          if (!(range > 0.0)) throw Error("setpoint_range must be positive");
          c.setpoint_area = head_on_area(c.camera, c.panel, range);
        },
        1};
    num("steady_state_threshold_px", "steady-state pass band on mean |pixel error|, pixels",
        &ScenarioConfig::steady_state_threshold_px);
    num("track.lead_in", "length of virtual track behind the leader start, metres",
        &ScenarioConfig::track_lead_in);
    k["lost_target"] = {"hold | stop: action when the camera loses the leader",
                        [](ScenarioConfig& c, std::string_view v) {
                          if (v == "hold") c.lost_target = LostTargetPolicy::hold;
                          else if (v == "stop") c.lost_target = LostTargetPolicy::stop;
                          else throw Error(fmt::format("unknown lost_target policy '{}'", v));
                        }};
    k["stop.when_stalled"] = {"end stationary-leader runs once the follower stalls",
                              [](ScenarioConfig& c, std::string_view v) {
                                c.stop_when_stalled = to_bool(v);
                              }};
    num("stop.stall_speed", "stall speed threshold, m/s", &ScenarioConfig::stall_speed);
    num("stop.stall_time", "time below stall speed before stopping, seconds",
        &ScenarioConfig::stall_time);

    k["leader.kind"] = {"stationary | straight_line | waypoint_path",
                        [](ScenarioConfig& c, std::string_view v) {
                          if (v == "stationary") c.leader.kind = LeaderKind::stationary;
                          else if (v == "straight_line") c.leader.kind = LeaderKind::straight_line;
                          else if (v == "waypoint_path") c.leader.kind = LeaderKind::waypoint_path;
                          else throw Error(fmt::format("unknown leader kind '{}'", v));
                        }};
    k["leader.x"] = {"leader start x, metres",
                     [](ScenarioConfig& c, std::string_view v) { c.leader.start.x = to_double(v); }};
    k["leader.y"] = {"leader start y, metres",
                     [](ScenarioConfig& c, std::string_view v) { c.leader.start.y = to_double(v); }};
    k["leader.heading"] = {"leader start heading, radians CCW from +x",
                           [](ScenarioConfig& c, std::string_view v) {
                             c.leader.start.heading = to_double(v);
                           }};
    k["leader.speed"] = {"constant leader speed, m/s",
                         [](ScenarioConfig& c, std::string_view v) {
                           c.leader.speed_profile = {{0.0, to_double(v)}};
                         }};
    k["leader.speed_profile"] = {"piecewise-constant speeds as T0:V0, T1:V1, ... (T0 = 0)",
                                 [](ScenarioConfig& c, std::string_view v) {
                                   c.leader.speed_profile = to_profile(v);
                                 }};
    k["leader.waypoints"] = {"waypoint_path vertices as X,Y; X,Y; ...",
                             [](ScenarioConfig& c, std::string_view v) {
                               c.leader.waypoints = to_points(v);
                             }};

    k["follower.x"] = {"follower start x, metres (closed_loop only)",
                       [](ScenarioConfig& c, std::string_view v) { c.follower_start.x = to_double(v); }};
    k["follower.y"] = {"follower start y, metres (closed_loop only)",
                       [](ScenarioConfig& c, std::string_view v) { c.follower_start.y = to_double(v); }};
    k["follower.heading"] = {"follower start heading, radians (closed_loop only)",
                             [](ScenarioConfig& c, std::string_view v) {
                               c.follower_start.heading = to_double(v);
                             }};
    k["follower.speed"] = {"follower start speed, m/s (closed_loop only)",
                           [](ScenarioConfig& c, std::string_view v) {
                             c.follower_start.speed = to_double(v);
                           }};
    num("follower.separation",
        "gap behind the leader start used by lateral_offset and path_follow, metres",
        &ScenarioConfig::separation);

    k["vehicle.wheelbase"] = {"follower wheelbase, metres",
                              [](ScenarioConfig& c, std::string_view v) { c.vehicle.wheelbase = to_double(v); }};
    k["vehicle.max_steer_angle"] = {"steering limit, radians",
                                    [](ScenarioConfig& c, std::string_view v) {
                                      c.vehicle.max_steer_angle = to_double(v);
                                    }};
    k["vehicle.max_speed"] = {"speed limit, m/s (also bounds leader speeds)",
                              [](ScenarioConfig& c, std::string_view v) { c.vehicle.max_speed = to_double(v); }};
    k["vehicle.max_accel"] = {"speed slew limit, m/s^2",
                              [](ScenarioConfig& c, std::string_view v) { c.vehicle.max_accel = to_double(v); }};

    k["camera.image_width"] = {"image width, pixels (even)",
                               [](ScenarioConfig& c, std::string_view v) { c.camera.image_width = to_int(v); }};
    k["camera.image_height"] = {"image height, pixels",
                                [](ScenarioConfig& c, std::string_view v) { c.camera.image_height = to_int(v); }};
    k["camera.horizontal_fov"] = {"horizontal field of view, radians",
                                  [](ScenarioConfig& c, std::string_view v) {
                                    c.camera.horizontal_fov = to_double(v);
                                  }};
    k["camera.frame_rate"] = {"frames per second; also the control rate",
                              [](ScenarioConfig& c, std::string_view v) { c.camera.frame_rate = to_double(v); }};
    k["camera.min_range"] = {"closest detectable range, metres",
                             [](ScenarioConfig& c, std::string_view v) { c.camera.min_range = to_double(v); }};
    k["camera.max_range"] = {"farthest detectable range, metres",
                             [](ScenarioConfig& c, std::string_view v) { c.camera.max_range = to_double(v); }};
    k["camera.jitter_px"] = {"half-width of uniform x-pixel jitter (0 = off)",
                             [](ScenarioConfig& c, std::string_view v) { c.camera.jitter_px = to_double(v); }};
    k["panel.width"] = {"target panel width, metres",
                        [](ScenarioConfig& c, std::string_view v) { c.panel.width = to_double(v); }};
    k["panel.height"] = {"target panel height, metres",
                         [](ScenarioConfig& c, std::string_view v) { c.panel.height = to_double(v); }};
    k["panel.mount_offset"] = {"panel centre distance behind the leader reference point, metres",
                               [](ScenarioConfig& c, std::string_view v) {
                                 c.panel.mount_offset = to_double(v);
                               }};

    k["step.separations"] = {"step_response start gaps, metres, comma separated",
                             [](ScenarioConfig& c, std::string_view v) { c.separations = to_doubles(v); }};
    num("lateral.offset", "lateral_offset sideways displacement, metres (+ = left)",
        &ScenarioConfig::lateral_offset);
    num("lateral.leader_speed", "lateral_offset leader speed, m/s (0 = stationary)",
        &ScenarioConfig::leader_speed);

    for (Channel ch : {Channel::steering, Channel::throttle}) {
      const std::string c = std::string(to_string(ch));
      k["controller." + c + ".kind"] = {"pid | fuzzy",
                                        [ch](ScenarioConfig& s, std::string_view v) {
                                          s.channel(ch).kind = to_kind(v);
                                        }};
      k["controller." + c + ".pwm_gain"] = {"PWM units per unit effort",
                                            [ch](ScenarioConfig& s, std::string_view v) {
                                              s.channel(ch).pwm_gain = to_double(v);
                                            }};
      k["controller." + c + ".locked"] = {"hold this channel at neutral PWM",
                                          [ch](ScenarioConfig& s, std::string_view v) {
                                            s.channel(ch).locked = to_bool(v);
                                          }};

      const std::string p = "pid." + c + ".";
      k[p + "preset"] = {"'default' defines this PID config with built-in values",
                         [ch](ScenarioConfig& s, std::string_view v) {
                           if (v != "default") throw Error(fmt::format("unknown preset '{}'", v));
                           pid_of(s, ch);
                         }};
      auto pid_num = [&k, &p, ch](const char* key, const char* doc, double PidConfig::*field) {
        k[p + key] = {doc, [ch, field](ScenarioConfig& s, std::string_view v) {
                        pid_of(s, ch).gains.*field = to_double(v);
                      }};
      };
      pid_num("kp", "proportional gain", &PidConfig::kp);
      pid_num("ki", "integral gain", &PidConfig::ki);
      pid_num("kd", "derivative gain (on measurement)", &PidConfig::kd);
      pid_num("output_limit", "symmetric effort saturation", &PidConfig::output_limit);
      pid_num("integral_limit", "bound on |ki * integral|", &PidConfig::integral_limit);
      pid_num("derivative_filter_alpha", "derivative low-pass weight in (0, 1]",
              &PidConfig::derivative_filter_alpha);
      k[p + "output_filter_alpha"] = {"exponential output filter weight in (0, 1]",
                                      [ch](ScenarioConfig& s, std::string_view v) {
                                        pid_of(s, ch).output_filter_alpha = to_double(v);
                                      }};

      const std::string f = "fuzzy." + c + ".";
      k[f + "preset"] = {"'default' defines this fuzzy config with built-in values",
                         [ch](ScenarioConfig& s, std::string_view v) {
                           if (v != "default") throw Error(fmt::format("unknown preset '{}'", v));
                           fuzzy_of(s, ch);
                         }};
      k[f + "spans"] = {"ERROR_SPAN, DELTA_SPAN[, OUTPUT_SPAN]: regenerate the standard "
                        "5-set triangles and diagonal rule table",
                        [ch](ScenarioConfig& s, std::string_view v) {
                          const auto spans = to_doubles(v);
                          if (spans.size() < 2 || spans.size() > 3) {
                            throw Error("spans takes 2 or 3 numbers");
                          }
                          for (double x : spans) {
                            if (!(x > 0.0)) throw Error("spans must be positive");
                          }
                          auto& fz = fuzzy_of(s, ch);
                          const int grid = fz.rules.grid_points;
                          fz.rules = FuzzyConfig::standard(spans[0], spans[1],
                                                           spans.size() == 3 ? spans[2] : 1.0);
                          fz.rules.grid_points = grid;
                        }};
      k[f + "grid_points"] = {"output grid size (>= 201)",
                              [ch](ScenarioConfig& s, std::string_view v) {
                                fuzzy_of(s, ch).rules.grid_points = to_int(v);
                              }};
      k[f + "output_filter_alpha"] = {"exponential output filter weight in (0, 1]",
                                      [ch](ScenarioConfig& s, std::string_view v) {
                                        fuzzy_of(s, ch).output_filter_alpha = to_double(v);
                                      }};
      k[f + "error_sets"] = {"LABEL:a,b,c[,d]; ... membership functions on normalised error",
                             [ch](ScenarioConfig& s, std::string_view v) {
                               fuzzy_of(s, ch).rules.error_sets = to_sets(v);
                             },
                             1};
      k[f + "delta_sets"] = {"LABEL:a,b,c[,d]; ... membership functions on error rate (1/s)",
                             [ch](ScenarioConfig& s, std::string_view v) {
                               fuzzy_of(s, ch).rules.delta_sets = to_sets(v);
                             },
                             1};
      k[f + "output_sets"] = {"LABEL:a,b,c[,d]; ... membership functions on effort",
                              [ch](ScenarioConfig& s, std::string_view v) {
                                fuzzy_of(s, ch).rules.output_sets = to_sets(v);
                              },
                              1};
      k[f + "rules"] = {"one row per error set (';' separated), one output label per delta set",
                        [ch](ScenarioConfig& s, std::string_view v) {
                          auto& fz = fuzzy_of(s, ch).rules;
                          fz.rules = to_rules(v, fz);
                        },
                        2};
    }
    return k;
  }();
  return keys;
}

}  // namespace

std::vector<KeyDoc> scenario_keys() {
  std::vector<KeyDoc> out;
  for (const auto& [key, def] : registry()) out.push_back({key, def.doc});
  return out;
}

ScenarioConfig parse_scenario(std::string_view text) {
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::map<std::string, std::size_t> seen;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("missing key", line_no);
    if (!registry().contains(key)) throw ParseError(fmt::format("unknown key '{}'", key), line_no);
    if (auto [it, fresh] = seen.emplace(key, line_no); !fresh) {
      throw ParseError(fmt::format("duplicate key '{}' (first on line {})", key, it->second),
                       line_no);
    }
    entries.push_back({std::move(key), std::move(value), line_no});
  }

  if (seen.contains("setpoint_range") && seen.contains("setpoint_area")) {
    throw ParseError("give either setpoint_area or setpoint_range, not both",
                     seen.at("setpoint_range"));
  }

  ScenarioConfig config = default_scenario();
  for (Channel ch : {Channel::steering, Channel::throttle}) {
    config.channel(ch).pid.reset();
    config.channel(ch).fuzzy.reset();
  }

  for (int pass = 0; pass <= 2; ++pass) {
    for (const auto& e : entries) {
      const auto& def = registry().at(e.key);
      if (def.pass != pass) continue;
      try {
        def.set(config, e.value);
      } catch (const ParseError&) {
        throw;
      } catch (const Error& err) {
        throw ParseError(fmt::format("{}: {}", e.key, err.what()), e.line);
      }
    }
  }

  try {
    config.validate();
  } catch (const Error& err) {
    throw ParseError(err.what(), 0);
  }
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), 0);
  }
}

}  // namespace lfsim
