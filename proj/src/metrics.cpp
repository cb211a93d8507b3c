#include "lfsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "lfsim/error.hpp"
#include "lfsim/trace_csv.hpp"

namespace lfsim {

double column_value(const TraceRecord& r, std::string_view column) {
  if (column == "t") return r.t;
  if (column == "leader_x") return r.leader.x;
  if (column == "leader_y") return r.leader.y;
  if (column == "follower_x") return r.follower.x;
  if (column == "follower_y") return r.follower.y;
  if (column == "follower_heading") return r.follower.heading;
  if (column == "pixel_error_x") return r.pixel_error_x;
  if (column == "area_error") return r.area_error;
  if (column == "steering_pwm") return r.steering_pwm;
  if (column == "throttle_pwm") return r.throttle_pwm;
  if (column == "lateral_dev_m") return r.lateral_dev;
  if (column == "follow_dist_m") return r.follow_dist;
  if (column == "detected") return r.detected ? 1.0 : 0.0;
  if (column == "loop_cost_us") return r.loop_cost_us;
  if (column == "op_count") return static_cast<double>(r.op_count);
  throw Error(fmt::format("unknown trace column '{}'", column));
}

bool is_column(std::string_view column) {
  return std::find(kTraceColumns.begin(), kTraceColumns.end(), column) != kTraceColumns.end();
}

std::string_view pwm_column_for(std::string_view signal) {
  if (signal == "area_error" || signal == "follow_dist_m" || signal == "throttle_pwm") {
    return "throttle_pwm";
  }
  return "steering_pwm";
}

std::optional<double> metric_value(const MetricSet& m, std::string_view name) {
  if (name == "rise_time") return m.rise_time;
  if (name == "settling_time") return m.settling_time;
  if (name == "overshoot") return m.overshoot;
  if (name == "steady_state_error") return m.steady_state_error;
  if (name == "rms_error") return m.rms_error;
  if (name == "control_effort_tv") return m.control_effort_tv;
  if (name == "mean_loop_cost") return m.mean_loop_cost;
  if (name == "mean_op_count") return m.mean_op_count;
  throw Error(fmt::format("unknown metric '{}'", name));
}

namespace {

// Time at which the normalised progress p first reaches `level`, linearly
// interpolated between the bracketing records.
std::optional<double> first_crossing(const std::vector<double>& t, const std::vector<double>& p,
                                     double level) {
  if (p[0] >= level) return t[0];
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] >= level) {
      const double f = (level - p[i - 1]) / (p[i] - p[i - 1]);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
  }
  return std::nullopt;
}

// Metrics that do not depend on a step: error about `target`, effort, cost.
void fill_common(const Trace& trace, std::string_view signal, double target, double window,
                 MetricSet& m) {
  const auto& recs = trace.records;
  const std::size_t n = recs.size();
  const auto pwm = pwm_column_for(signal);

  double sq = 0.0;
  double tv = 0.0;
  double cost = 0.0;
  double ops = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = column_value(recs[i], signal) - target;
    sq += e * e;
    cost += recs[i].loop_cost_us;
    ops += static_cast<double>(recs[i].op_count);
    if (i > 0) tv += std::abs(column_value(recs[i], pwm) - column_value(recs[i - 1], pwm));
  }
  m.rms_error = std::sqrt(sq / static_cast<double>(n));
  m.control_effort_tv = tv;
  m.mean_loop_cost = cost / static_cast<double>(n);
  m.mean_op_count = ops / static_cast<double>(n);

  const auto tail = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(window * static_cast<double>(n) - 1e-9)));
  double acc = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) acc += std::abs(column_value(recs[i], signal) - target);
  m.steady_state_error = acc / static_cast<double>(tail);
}

void check_trace(const Trace& trace, std::string_view signal) {
  if (!is_column(signal)) throw Error(fmt::format("unknown trace column '{}'", signal));
  if (trace.records.size() < 5) {
    throw Error(fmt::format(
        "trace '{}' has {} records; at least 5 are needed to form the settling band and the "
        "final averaging window",
        trace.scenario, trace.records.size()));
  }
}

}  // namespace

MetricSet step_metrics(const Trace& trace, const StepSpec& spec) {
  check_trace(trace, spec.signal);
  if (spec.setpoint_delta == 0.0 || !std::isfinite(spec.setpoint_delta)) {
    throw Error("step_metrics: setpoint_delta must be non-zero");
  }
  if (!(spec.rise_low < spec.rise_high) || !(spec.settle_band > 0.0) ||
      !(spec.steady_window > 0.0 && spec.steady_window <= 1.0)) {
    throw Error("step_metrics: invalid rise levels, settling band or window");
  }

  const auto& recs = trace.records;
  const std::size_t n = recs.size();
  const double target = spec.baseline + spec.setpoint_delta;
  const double mag = std::abs(spec.setpoint_delta);
  const double sign = spec.setpoint_delta > 0.0 ? 1.0 : -1.0;

  std::vector<double> t(n), y(n), p(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = recs[i].t;
    y[i] = column_value(recs[i], spec.signal);
    p[i] = (y[i] - spec.baseline) / spec.setpoint_delta;
  }

  MetricSet m;
  const auto lo = first_crossing(t, p, spec.rise_low);
  const auto hi = first_crossing(t, p, spec.rise_high);
  if (lo && hi) m.rise_time = *hi - *lo;

  const double band = spec.settle_band * mag;
  std::optional<std::size_t> last_out;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(y[i] - target) > band) last_out = i;
  }
  if (!last_out) {
    m.settling_time = 0.0;
  } else if (*last_out + 1 < n) {
    m.settling_time = t[*last_out + 1] - t[0];
  }

  double beyond = 0.0;
  for (double v : y) beyond = std::max(beyond, (v - target) * sign);
  m.overshoot = 100.0 * beyond / mag;

  fill_common(trace, spec.signal, target, spec.steady_window, m);
  return m;
}

MetricSet error_metrics(const Trace& trace, std::string_view signal) {
  check_trace(trace, signal);
  const double first = column_value(trace.records.front(), signal);
  if (std::abs(first) <= kZeroStep) {
    MetricSet m;
    fill_common(trace, signal, 0.0, StepSpec{}.steady_window, m);
    return m;
  }
  StepSpec spec;
  spec.signal = std::string(signal);
  spec.baseline = first;
  spec.setpoint_delta = -first;
  return step_metrics(trace, spec);
}

std::string_view primary_signal(const Trace& trace) {
  return trace.config.steering.locked ? "area_error" : "pixel_error_x";
}

}  // namespace lfsim
