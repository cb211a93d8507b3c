#include "lfsim/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "lfsim/error.hpp"

namespace lfsim {

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::pid: return "pid";
    case Winner::fuzzy: return "fuzzy";
    case Winner::tie: return "tie";
  }
  return "?";
}

const TieBand& Tolerances::band(std::string_view metric) const {
  const auto it = per_metric.find(metric);
  return it == per_metric.end() ? fallback : it->second;
}

Winner pick_winner(std::optional<double> pid, std::optional<double> fuzzy, const TieBand& band) {
  if (!pid && !fuzzy) return Winner::tie;
  if (!fuzzy) return Winner::pid;
  if (!pid) return Winner::fuzzy;
  const double a = *pid;
  const double b = *fuzzy;
  const double allowed = std::max(band.absolute, band.relative * std::max(std::abs(a), std::abs(b)));
  if (std::abs(a - b) <= allowed) return Winner::tie;
  return a < b ? Winner::pid : Winner::fuzzy;
}

namespace {

std::vector<std::string> resolve_names(const std::vector<std::string>& metrics) {
  if (metrics.empty()) return {kMetricNames.begin(), kMetricNames.end()};
  for (const auto& m : metrics) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), m) == kMetricNames.end()) {
      throw Error(fmt::format("unknown metric '{}'", m));
    }
  }
  return metrics;
}

template <typename F>
void with_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  body(out);
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace

ComparisonReport compare(const Trace& pid, const Trace& fuzzy, const Tolerances& tolerances,
                         const std::vector<std::string>& metrics) {
  if (pid.scenario != fuzzy.scenario) {
    throw Error(fmt::format("cannot compare traces from different scenarios ('{}' vs '{}')",
                            pid.scenario, fuzzy.scenario));
  }
  const auto signal = primary_signal(pid);
  if (signal != primary_signal(fuzzy)) {
    throw Error("cannot compare a steering run against a throttle-only run");
  }

  ComparisonReport rep;
  rep.scenario = pid.scenario;
  rep.signal = std::string(signal);
  rep.pid = error_metrics(pid, signal);
  rep.fuzzy = error_metrics(fuzzy, signal);

  for (const auto& name : resolve_names(metrics)) {
    MetricRow row;
    row.metric = name;
    row.pid = metric_value(rep.pid, name);
    row.fuzzy = metric_value(rep.fuzzy, name);
    row.winner = pick_winner(row.pid, row.fuzzy, tolerances.band(name));
    if (row.pid && row.fuzzy) row.margin = std::abs(*row.pid - *row.fuzzy);
    rep.rows.push_back(row);
  }

  const double pid_ops = rep.pid.mean_op_count;
  const double fz_ops = rep.fuzzy.mean_op_count;
  if (pid_ops > 0.0) {
    rep.notes.push_back(fmt::format(
        "fuzzy control used {:.1f}x the arithmetic operations of PID per record ({:.6g} vs {:.6g})",
        fz_ops / pid_ops, fz_ops, pid_ops));
  } else {
    rep.notes.push_back(fmt::format("mean op count: pid {:.6g}, fuzzy {:.6g}", pid_ops, fz_ops));
  }

  if (signal == "pixel_error_x") {
    const double thr = pid.config.steady_state_threshold_px;
    auto verdict = [thr](double v) { return v < thr ? "below" : "not below"; };
    rep.notes.push_back(fmt::format(
        "steady-state |pixel error| over the final 20%: pid {:.6g} px ({}), fuzzy {:.6g} px ({}) "
        "the {:g} px threshold",
        rep.pid.steady_state_error, verdict(rep.pid.steady_state_error),
        rep.fuzzy.steady_state_error, verdict(rep.fuzzy.steady_state_error), thr));
  }
  if (!pid.stop_reason.empty()) rep.notes.push_back("pid run stopped early: " + pid.stop_reason);
  if (!fuzzy.stop_reason.empty()) {
    rep.notes.push_back("fuzzy run stopped early: " + fuzzy.stop_reason);
  }
  return rep;
}

std::string format_cell(std::optional<double> v) {
  return v ? fmt::format("{:.6g}", *v) : std::string("n/a");
}

void write_report(const ComparisonReport& report, std::ostream& out) {
  out << "# " << report.scenario << ": pid vs fuzzy\n\n";
  out << "Signal: `" << report.signal << "`\n\n";
  out << "| metric | pid | fuzzy | winner | margin |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& r : report.rows) {
    out << fmt::format("| {} | {} | {} | {} | {} |\n", r.metric, format_cell(r.pid),
                       format_cell(r.fuzzy), to_string(r.winner), format_cell(r.margin));
  }
  if (!report.notes.empty()) {
    out << "\n";
    for (const auto& n : report.notes) out << "- " << n << "\n";
  }
}

void write_report(const ComparisonReport& report, const std::filesystem::path& path) {
  with_file(path, [&](std::ostream& out) { write_report(report, out); });
}

void write_metric_summary(const std::vector<Trace>& traces, const std::vector<MetricSet>& metrics,
                          const std::vector<std::string>& names, std::ostream& out) {
  if (traces.size() != metrics.size()) throw Error("summary: one MetricSet per trace expected");
  const auto cols = resolve_names(names);
  out << "| trace |";
  for (const auto& c : cols) out << ' ' << c << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
  out << "\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    out << "| " << traces[i].scenario << " |";
    for (const auto& c : cols) out << ' ' << format_cell(metric_value(metrics[i], c)) << " |";
    out << "\n";
  }
}

void write_metric_summary(const std::vector<Trace>& traces, const std::vector<MetricSet>& metrics,
                          const std::vector<std::string>& names, const std::filesystem::path& path) {
  with_file(path, [&](std::ostream& out) { write_metric_summary(traces, metrics, names, out); });
}

}  // namespace lfsim
