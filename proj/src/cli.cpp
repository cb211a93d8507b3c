#include "lfsim/cli.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "lfsim/error.hpp"
#include "lfsim/experiments.hpp"
#include "lfsim/metrics.hpp"
#include "lfsim/report.hpp"
#include "lfsim/svg_plot.hpp"
#include "lfsim/trace_csv.hpp"
#include "lfsim/tuning.hpp"

namespace fs = std::filesystem;

namespace lfsim {

namespace {

struct Common {
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string metrics;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario file (key = value)")->required();
  cmd->add_option("--out", c.out, "Output directory, created if missing")->required();
  cmd->add_option("--seed", c.seed, "Seed for sensor pixel jitter (overrides the scenario)");
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(',', start);
    if (pos == std::string_view::npos) pos = text.size();
    auto tok = text.substr(start, pos - start);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw Error(fmt::format("cannot parse '{}' in list '{}'", tok, text));
    }
    out.push_back(v);
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> parse_metric_names(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (std::find(kMetricNames.begin(), kMetricNames.end(), item) == kMetricNames.end()) {
      throw Error(fmt::format("unknown metric '{}'", item));
    }
    out.push_back(item);
  }
  return out;
}

ScenarioConfig load(const Common& c) {
  ScenarioConfig cfg = load_scenario(c.scenario);
  if (c.seed) cfg.seed = *c.seed;
  fs::create_directories(c.out);
  return cfg;
}

void write_trace_files(const Trace& t, const fs::path& dir, const std::string& stem) {
  write_trace_csv(t, dir / (stem + ".csv"));
  write_plot_svg(t, default_plot_channels(t), dir / (stem + ".svg"));
}

std::string summary_line(const Trace& t) {
  const auto& last = t.records.back();
  return fmt::format("{} [{}]: {} records, t_end {:.3g} s, final pixel error {:.3g} px, "
                     "final area error {:.6g} px^2, follow distance {:.3g} m{}",
                     t.scenario, t.label, t.records.size(), last.t, last.pixel_error_x,
                     last.area_error, last.follow_dist,
                     t.stop_reason.empty() ? "" : ", stopped: " + t.stop_reason);
}

int cmd_run(const Common& c, std::ostream& out) {
  const auto cfg = load(c);
  for (const auto& t : run_archetype(cfg)) {
    write_trace_files(t, c.out, t.scenario);
    out << summary_line(t) << '\n';
  }
  return 0;
}

void require_both(const ScenarioConfig& cfg) {
  for (Channel ch : {Channel::steering, Channel::throttle}) {
    if (ch == Channel::steering && cfg.archetype == Archetype::step_response) continue;
    const auto& s = cfg.channel(ch);
    if (s.locked) continue;
    if (!s.pid || !s.fuzzy) {
      throw Error(fmt::format("compare needs both pid.{0}.* and fuzzy.{0}.* configs (or "
                              "preset = default for each)",
                              to_string(ch)));
    }
  }
}

int cmd_compare(const Common& c, std::ostream& out) {
  const auto cfg = load(c);
  require_both(cfg);
  const auto names = parse_metric_names(c.metrics);
  const auto pid = run_archetype(with_controllers(cfg, ControllerKind::pid));
  const auto fuzzy = run_archetype(with_controllers(cfg, ControllerKind::fuzzy));
  for (std::size_t i = 0; i < pid.size(); ++i) {
    const auto& name = pid[i].scenario;
    write_trace_files(pid[i], c.out, name + "_pid");
    write_trace_files(fuzzy[i], c.out, name + "_fuzzy");
    const auto rep = compare(pid[i], fuzzy[i], {}, names);
    write_report(rep, fs::path(c.out) / (name + "_report.md"));
    out << name << ":";
    for (const auto& r : rep.rows) out << ' ' << r.metric << '=' << to_string(r.winner);
    out << '\n';
  }
  return 0;
}

int cmd_tune(const Common& c, const std::string& channel, const std::string& grid_file,
             const std::string& objective, std::ostream& out) {
  TuneSpec spec;
  if (channel == "steering") spec.channel = Channel::steering;
  else if (channel == "throttle") spec.channel = Channel::throttle;
  else throw Error(fmt::format("unknown channel '{}'", channel));
  spec.objective = parse_objective(objective);
  spec.grid = load_grid(grid_file);
  spec.scenario = load(c);

  const auto result = tune(spec, c.out);
  write_tune_csv(result, fs::path(c.out) / "tune_results.csv");
  const auto& best = result.ranked.front();
  std::string params;
  for (std::size_t i = 0; i < best.params.size(); ++i) {
    params += fmt::format("{}{}={:.6g}", i ? " " : "", result.param_names[i], best.params[i]);
  }
  out << fmt::format("best {} {}: {} ({} {:.6g}, {} candidates)\n", to_string(spec.channel),
                     to_string(result.kind), params, to_string(spec.objective), best.score,
                     result.ranked.size());
  return 0;
}

int cmd_sweep(const Common& c, const std::string& separations, std::ostream& out) {
  const auto seps = parse_list(separations);
  const auto names = parse_metric_names(c.metrics);
  auto cfg = load(c);
  cfg.separations = seps;
  const auto traces = run_step_response(cfg, seps);
  std::vector<MetricSet> metrics;
  for (const auto& t : traces) {
    write_trace_files(t, c.out, t.scenario);
    metrics.push_back(error_metrics(t, "area_error"));
    out << summary_line(t) << '\n';
  }
  write_metric_summary(traces, metrics, names, fs::path(c.out) / (cfg.name + "_sweep.md"));
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Leader-follower simulator: PID and fuzzy visual-servoing experiments"};
  app.require_subcommand(1);

  Common run_o, cmp_o, tune_o, sweep_o;
  auto* run = app.add_subcommand("run", "Run the scenario's archetype; write trace CSV and SVG plot");
  add_common(run, run_o);

  auto* cmp = app.add_subcommand("compare", "Run with PID then fuzzy controllers and write a comparison report");
  add_common(cmp, cmp_o);
  cmp->add_option("--metrics", cmp_o.metrics, "Comma-separated subset of report metrics");

  std::string channel;
  std::string grid;
  std::string objective = "itae";
  auto* tn = app.add_subcommand("tune", "Exhaustive grid search over one channel's gains");
  add_common(tn, tune_o);
  tn->add_option("--channel", channel, "steering | throttle")
      ->required()
      ->check(CLI::IsMember({"steering", "throttle"}));
  tn->add_option("--grid", grid, "Grid file: 'kp = ...', 'ki = ...', 'kd = ...' or 'output_scale = ...'")
      ->required();
  tn->add_option("--objective", objective, "itae | ise | rms")
      ->capture_default_str()
      ->check(CLI::IsMember({"itae", "ise", "rms"}));

  std::string separations;
  auto* sw = app.add_subcommand("sweep", "Throttle step responses from several separations");
  add_common(sw, sweep_o);
  sw->add_option("--separations", separations, "Comma-separated start separations in metres, e.g. 1,2,4")
      ->required();
  sw->add_option("--metrics", sweep_o.metrics, "Comma-separated subset of summary metrics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*run) return cmd_run(run_o, out);
    if (*cmp) return cmd_compare(cmp_o, out);
    if (*tn) return cmd_tune(tune_o, channel, grid, objective, out);
    if (*sw) return cmd_sweep(sweep_o, separations, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lfsim
