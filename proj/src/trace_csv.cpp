#include "lfsim/trace_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/core.h>

#include "lfsim/error.hpp"

namespace lfsim {

namespace {

std::string num(double v) { return fmt::format("{:.9g}", v); }

double parse_field(std::string_view s, std::string_view column, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(fmt::format("column '{}': '{}' is not a number", column, s), line);
  }
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
  std::string header;
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i) header += ',';
    header += kTraceColumns[i];
  }
  out << header << '\n';
  for (const auto& r : trace.records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.t),
                       num(r.leader.x), num(r.leader.y), num(r.follower.x), num(r.follower.y),
                       num(r.follower.heading), num(r.pixel_error_x), num(r.area_error),
                       num(r.steering_pwm), num(r.throttle_pwm), num(r.lateral_dev),
                       num(r.follow_dist), r.detected ? 1 : 0, num(r.loop_cost_us), r.op_count);
  }
}

void write_trace_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_trace_csv(trace, out);
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

Trace read_trace_csv(std::istream& in, std::string scenario) {
  Trace trace;
  trace.scenario = std::move(scenario);

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError("missing header row", 1);
  if (!line.empty() && line.back() == '\r') throw ParseError("CRLF line endings", 1);

  const auto header = split_csv(line);
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i >= header.size()) {
      throw ParseError(fmt::format("header is missing column '{}'", kTraceColumns[i]), 1);
    }
    if (header[i] != kTraceColumns[i]) {
      throw ParseError(fmt::format("unexpected header '{}' at position {} (expected '{}')",
                                   header[i], i + 1, kTraceColumns[i]),
                       1);
    }
  }
  if (header.size() > kTraceColumns.size()) {
    throw ParseError(fmt::format("unexpected extra header '{}'", header[kTraceColumns.size()]), 1);
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kTraceColumns.size()) {
      throw ParseError(fmt::format("expected {} fields, found {}", kTraceColumns.size(), f.size()),
                       line_no);
    }
    double v[kTraceColumns.size()];
    for (std::size_t i = 0; i < f.size(); ++i) v[i] = parse_field(f[i], kTraceColumns[i], line_no);

    TraceRecord r;
    r.t = v[0];
    r.leader.x = v[1];
    r.leader.y = v[2];
    r.follower.x = v[3];
    r.follower.y = v[4];
    r.follower.heading = v[5];
    r.pixel_error_x = v[6];
    r.area_error = v[7];
    r.steering_pwm = v[8];
    r.throttle_pwm = v[9];
    r.lateral_dev = v[10];
    r.follow_dist = v[11];
    if (v[12] != 0.0 && v[12] != 1.0) throw ParseError("column 'detected' must be 0 or 1", line_no);
    r.detected = v[12] == 1.0;
    r.loop_cost_us = v[13];
    if (v[14] < 0.0 || v[14] != std::floor(v[14])) {
      throw ParseError("column 'op_count' must be a non-negative integer", line_no);
    }
    r.op_count = static_cast<std::uint64_t>(v[14]);
    if (!trace.records.empty() && !(r.t > trace.records.back().t)) {
      throw ParseError("time column is not strictly increasing", line_no);
    }
    trace.records.push_back(r);
  }
  return trace;
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  try {
    return read_trace_csv(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), 0);
  }
}

}  // namespace lfsim
