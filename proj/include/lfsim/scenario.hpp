#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lfsim/fuzzy.hpp"
#include "lfsim/pid.hpp"
#include "lfsim/sensor.hpp"
#include "lfsim/world.hpp"

namespace lfsim {

enum class Channel { steering, throttle };
enum class ControllerKind { pid, fuzzy };
enum class Archetype { closed_loop, step_response, lateral_offset, path_follow };
enum class LostTargetPolicy { hold, stop };

std::string_view to_string(Channel c);
std::string_view to_string(ControllerKind k);
std::string_view to_string(Archetype a);
std::string_view to_string(LostTargetPolicy p);

struct PidChannelConfig {
  PidConfig gains;
  // Exponential smoothing of the PID output; 1 leaves it unfiltered.
  double output_filter_alpha = 1.0;
};

struct FuzzyChannelConfig {
  FuzzyConfig rules;
  double output_filter_alpha = 0.3;
};

// One actuation channel. Both controller configs may be present so that a
// scenario can be run either way; `kind` picks the one used by run_scenario.
struct ChannelSetup {
  ControllerKind kind = ControllerKind::pid;
  double pwm_gain = 90.0;
  // Holds the channel at neutral PWM and skips its controller.
  bool locked = false;
  std::optional<PidChannelConfig> pid;
  std::optional<FuzzyChannelConfig> fuzzy;
};

PidChannelConfig default_pid(Channel channel);
FuzzyChannelConfig default_fuzzy(Channel channel);

struct ScenarioConfig {
  std::string name = "scenario";
  Archetype archetype = Archetype::closed_loop;

  double dt = 0.01;
  double duration = 20.0;
  std::uint64_t seed = 0;
  // Physics sub-step ceiling; each record interval is split evenly.
  double max_physics_step = 0.002;

  LeaderScript leader;
  VehicleState follower_start{-2.0, 0.0, 0.0, 0.0};
  VehicleParams vehicle;

  CameraIntrinsics camera;
  TargetPanel panel;
  double setpoint_area = 4000.0;

  ChannelSetup steering;
  ChannelSetup throttle;

  LostTargetPolicy lost_target = LostTargetPolicy::hold;
  // Ends a stationary-leader run once the follower, having moved, stays
  // below stall_speed for stall_time seconds.
  bool stop_when_stalled = true;
  double stall_speed = 0.01;
  double stall_time = 1.0;

  double steady_state_threshold_px = 5.0;
  // Length of the virtual track laid out behind the leader's start pose.
  double track_lead_in = 50.0;

  // Archetype parameters.
  std::vector<double> separations{1.0, 2.0, 4.0};
  double separation = 2.0;
  double lateral_offset = 1.0;
  double leader_speed = 0.0;

  ChannelSetup& channel(Channel c) { return c == Channel::steering ? steering : throttle; }
  const ChannelSetup& channel(Channel c) const {
    return c == Channel::steering ? steering : throttle;
  }

  // Camera frames happen every frame_steps() records.
  int frame_steps() const;
  int physics_substeps() const;
  std::size_t record_count() const;

  void validate() const;
};

// Defaults for every field with both controller configs populated on both
// channels.
ScenarioConfig default_scenario();

// Parses the flat `key = value` scenario format. Unknown keys, malformed
// values and failed validation raise ParseError with the offending line.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct KeyDoc {
  std::string key;
  std::string description;
};

// Every accepted scenario key with a one-line description.
std::vector<KeyDoc> scenario_keys();

}  // namespace lfsim
