#pragma once

#include <span>
#include <vector>

#include "lfsim/scenario.hpp"
#include "lfsim/trace.hpp"

namespace lfsim {

// Closed loop: camera frame -> pixel/area errors -> controllers -> PWM ->
// actuation -> bicycle kinematics, one TraceRecord per dt. Controllers run
// only on camera frames and their commands are held in between. Validates
// the config before stepping. Deterministic for a fixed config and seed,
// apart from the loop_cost_us timing field.
Trace run_scenario(const ScenarioConfig& config);

// Throttle-only step tests: for each separation the follower starts that far
// directly behind a stationary leader with steering locked at neutral and
// runs for the full duration. Separations are run concurrently; the result
// keeps input order.
std::vector<Trace> run_step_response(const ScenarioConfig& base,
                                     std::span<const double> separations);

// Follower starts base.separation behind the leader and `offset` metres to
// its left (negative = right), aligned with the leader heading. The leader is
// stationary when leader_speed is 0, otherwise drives straight.
Trace run_lateral_offset(const ScenarioConfig& base, double offset, double leader_speed);

// Follower starts base.separation behind the start of `path`.
Trace run_path_follow(const ScenarioConfig& base, const LeaderScript& path);

// Dispatches on config.archetype using the archetype parameters stored in
// the config. Returns one trace, or one per separation for step_response.
std::vector<Trace> run_archetype(const ScenarioConfig& config);

// Copy of `config` with both channels switched to `kind`.
ScenarioConfig with_controllers(const ScenarioConfig& config, ControllerKind kind);

}  // namespace lfsim
