#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "lfsim/trace.hpp"

namespace lfsim {

inline constexpr std::array<std::string_view, 15> kTraceColumns = {
    "t",            "leader_x",      "leader_y",     "follower_x",   "follower_y",
    "follower_heading", "pixel_error_x", "area_error", "steering_pwm", "throttle_pwm",
    "lateral_dev_m", "follow_dist_m", "detected",    "loop_cost_us", "op_count"};

// Header row plus one row per record, 9 significant digits, LF endings.
void write_trace_csv(const Trace& trace, std::ostream& out);
void write_trace_csv(const Trace& trace, const std::filesystem::path& path);

// Strict reader: the header must match kTraceColumns exactly and in order.
// Fields the schema does not carry keep their defaults. Throws ParseError
// with the 1-based line number on malformed input.
Trace read_trace_csv(std::istream& in, std::string scenario = {});
// The scenario name is taken from the file stem.
Trace read_trace_csv(const std::filesystem::path& path);

}  // namespace lfsim
