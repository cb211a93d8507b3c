#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lfsim/trace.hpp"

namespace lfsim {

// Time-series plot of trace columns. Columns ending in "_pwm" share a right
// axis fixed to the servo range 0..180; every other column is drawn against
// an auto-scaled left axis. Each channel becomes one polyline with one point
// per record (a single-record trace gets a marker instead). Throws on a
// column outside the CSV schema.
void write_plot_svg(const Trace& trace, const std::vector<std::string>& channels,
                    std::ostream& out);
void write_plot_svg(const Trace& trace, const std::vector<std::string>& channels,
                    const std::filesystem::path& path);

// Error column and the PWM column that drives it, for the trace's active loop.
std::vector<std::string> default_plot_channels(const Trace& trace);

}  // namespace lfsim
