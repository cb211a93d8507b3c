// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance WORK_DIR UNIT_TEST_BINARY

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "lfsim/cli.hpp"
#include "lfsim/experiments.hpp"
#include "lfsim/fuzzy.hpp"
#include "lfsim/metrics.hpp"
#include "lfsim/report.hpp"
#include "lfsim/trace_csv.hpp"
#include "lfsim/tuning.hpp"
#include "lfsim/world.hpp"

using namespace lfsim;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path kScenarios = LFSIM_SCENARIO_DIR;
const char* const kDefaultScenarios[] = {"equilibrium.scn",           "step_response.scn",
                                         "lateral_offset_stationary.scn", "lateral_offset_moving.scn",
                                         "path_follow.scn",           "hairpin.scn"};

int run_cli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "lfsim");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream e;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, e);
  if (err) *err = e.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double tail_mean_abs_px(const Trace& t) {
  const std::size_t n = t.records.size();
  const auto k = static_cast<std::size_t>(std::ceil(0.2 * static_cast<double>(n)));
  double acc = 0.0;
  for (std::size_t i = n - k; i < n; ++i) acc += std::abs(t.records[i].pixel_error_x);
  return acc / static_cast<double>(k);
}

// 1 ------------------------------------------------------------------------
Outcome kinematics_oracle() {
  const auto t0 = Clock::now();
  VehicleParams p;
  p.max_accel = 1e9;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> steer(-p.max_steer_angle, p.max_steer_angle);
  std::uniform_real_distribution<double> speed(0.05, p.max_speed);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const double d = steer(rng);
    const double v = speed(rng);
    VehicleState s{0, 0, 0, v};
    for (int i = 0; i < 10000; ++i) s = step_bicycle(s, p, d, v, 1e-3);
    const double t = 10.0;
    double x = v * t;
    double y = 0.0;
    if (d != 0.0) {
      const double r = p.wheelbase / std::tan(d);
      x = r * std::sin(v * t / r);
      y = r * (1.0 - std::cos(v * t / r));
    }
    worst = std::max(worst, std::hypot(s.x - x, s.y - y));
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-3 && secs < 5.0,
          fmt::format("max position error {:.3g} m over 20 pairs, {:.2f} s", worst, secs)};
}

// 2 ------------------------------------------------------------------------
MembershipFunction random_mf(std::mt19937_64& rng, double lo, double hi, bool at_lo, bool at_hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  double p[4] = {u(rng), u(rng), u(rng), u(rng)};
  std::sort(p, p + 4);
  if (at_lo) p[0] = lo;
  if (at_hi) p[3] = hi;
  // Shoulders half of the time at the edges.
  if (at_lo && rng() % 2) p[1] = lo;
  if (at_hi && rng() % 2) p[2] = hi;
  if (!(p[0] < p[3])) p[3] = p[0] + 1e-3 * (hi - lo);
  if (rng() % 2) return MembershipFunction::trapezoid(p[0], p[1], p[2], p[3]);
  return MembershipFunction::triangle(p[0], 0.5 * (p[1] + p[2]), p[3]);
}

std::vector<FuzzySet> random_cover(std::mt19937_64& rng, double lo, double hi, std::size_t n) {
  // Evenly spaced overlapping triangles guarantee coverage; random jitter of
  // the interior peaks keeps them irregular.
  std::vector<double> peaks(n);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    peaks[i] = lo + step * static_cast<double>(i);
    if (i > 0 && i + 1 < n) peaks[i] += jitter(rng) * step;
  }
  std::vector<FuzzySet> sets;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i == 0 ? lo : peaks[i - 1];
    const double c = i + 1 == n ? hi : peaks[i + 1];
    sets.push_back({fmt::format("S{}", i), MembershipFunction::triangle(a, peaks[i], c)});
  }
  return sets;
}

double degree_ref(const MembershipFunction& mf, double x) {
  auto b = mf.breakpoints();
  if (b.size() == 3) b = {b[0], b[1], b[1], b[2]};
  if (x < b[0] || x > b[3]) return 0.0;
  if (x >= b[1] && x <= b[2]) return 1.0;
  return x < b[1] ? (x - b[0]) / (b[1] - b[0]) : (b[3] - x) / (b[3] - b[2]);
}

Outcome defuzz_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int evaluated = 0;
  while (evaluated < 100) {
    FuzzyConfig c;
    c.error_sets = random_cover(rng, -1.0, 1.0, 3 + rng() % 5);
    c.delta_sets = random_cover(rng, -2.0, 2.0, 3 + rng() % 5);
    const double lo = -1.0 - std::abs(u(rng));
    const double hi = 1.0 + std::abs(u(rng));
    const std::size_t k = 2 + rng() % 6;
    for (std::size_t i = 0; i < k; ++i) {
      c.output_sets.push_back({fmt::format("O{}", i), random_mf(rng, lo, hi, i == 0, i + 1 == k)});
    }
    for (std::size_t i = 0; i < c.error_sets.size() * c.delta_sets.size(); ++i) c.rules.push_back(rng() % k);
    c.grid_points = 201 + static_cast<int>(rng() % 200);
    c.validate();

    const double e = 1.2 * u(rng);
    const double d = 2.4 * u(rng);
    const auto ed = fuzzify(e, c.error_sets);
    const auto dd = fuzzify(d, c.delta_sets);
    const auto agg = infer(c, ed, dd);
    double den_check = 0.0;
    for (double m : agg.membership) den_check += m;
    if (den_check == 0.0) continue;  // uncovered output region; not a centroid case
    const double got = defuzz_centroid(agg);

    // Trapezoidal integration of the same aggregate on a 10x finer grid.
    const auto univ = universe_of(c.output_sets);
    const int n = 10 * (c.grid_points - 1) + 1;
    double num = 0.0;
    double den = 0.0;
    for (int g = 0; g < n; ++g) {
      const double x = univ.lo + univ.span() * g / (n - 1);
      double m = 0.0;
      for (std::size_t i = 0; i < ed.size(); ++i) {
        for (std::size_t j = 0; j < dd.size(); ++j) {
          m = std::max(m, std::min(std::min(ed[i], dd[j]), degree_ref(c.output_sets[c.rule(i, j)].mf, x)));
        }
      }
      const double w = (g == 0 || g == n - 1) ? 0.5 : 1.0;
      num += w * x * m;
      den += w * m;
    }
    worst = std::max(worst, std::abs(got - num / den) / univ.span());
    ++evaluated;
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-3 && secs < 5.0,
          fmt::format("max |centroid - fine integral| = {:.3g} of span over 100 configs, {:.2f} s", worst,
                      secs)};
}

// 3 / 4 --------------------------------------------------------------------
Outcome stationary_offset_stalls() {
  std::string detail;
  bool ok = true;
  for (auto kind : {ControllerKind::pid, ControllerKind::fuzzy}) {
    auto c = with_controllers(default_scenario(), kind);
    c.duration = 60.0;
    const auto tr = run_lateral_offset(c, 1.0, 0.0);
    const auto& last = tr.records.back();
    const bool pass = !tr.stop_reason.empty() && last.follower.speed < 0.01 &&
                      std::abs(last.pixel_error_x) > c.steady_state_threshold_px;
    ok &= pass;
    detail += fmt::format("{}{}: stopped at {:.2f} s, v {:.4f} m/s, |px| {:.2f}", detail.empty() ? "" : "; ",
                          to_string(kind), last.t, last.follower.speed, std::abs(last.pixel_error_x));
  }
  return {ok, detail};
}

Outcome moving_offset_converges() {
  std::string detail;
  bool ok = true;
  for (auto kind : {ControllerKind::pid, ControllerKind::fuzzy}) {
    const auto c = with_controllers(default_scenario(), kind);
    const auto tr = run_lateral_offset(c, 1.0, 1.0);
    const double m = tail_mean_abs_px(tr);
    ok &= m < c.steady_state_threshold_px;
    detail += fmt::format("{}{}: final-20% mean |px| {:.3f}", detail.empty() ? "" : "; ", to_string(kind), m);
  }
  return {ok, detail};
}

// 5 ------------------------------------------------------------------------
Outcome step_dependence() {
  const std::vector<double> seps{1.0, 2.0, 4.0};
  std::string detail;
  bool ok = true;
  for (auto kind : {ControllerKind::pid, ControllerKind::fuzzy}) {
    const auto traces = run_step_response(with_controllers(default_scenario(), kind), seps);
    std::vector<MetricSet> m;
    for (const auto& t : traces) m.push_back(error_metrics(t, "area_error"));
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        ok &= m[a].rise_time != m[b].rise_time || m[a].settling_time != m[b].settling_time;
      }
    }
    detail += fmt::format("{}{} rise", detail.empty() ? "" : "; ", to_string(kind));
    for (const auto& x : m) detail += " " + format_cell(x.rise_time);
    detail += " settle";
    for (const auto& x : m) detail += " " + format_cell(x.settling_time);
  }
  return {ok, detail};
}

// 6 ------------------------------------------------------------------------
Outcome resource_comparison(const fs::path& work) {
  bool ok = true;
  std::string detail;
  for (const char* name : kDefaultScenarios) {
    const auto out = work / "c6" / name;
    std::string err;
    if (run_cli({"compare", "--scenario", (kScenarios / name).string(), "--out", out.string()}, &err) != 0) {
      return {false, fmt::format("{}: compare failed: {}", name, err)};
    }
    const auto cfg = load_scenario(kScenarios / name);
    const auto pid = run_archetype(with_controllers(cfg, ControllerKind::pid));
    const auto fz = run_archetype(with_controllers(cfg, ControllerKind::fuzzy));
    for (std::size_t i = 0; i < pid.size(); ++i) {
      const auto rep = compare(pid[i], fz[i]);
      const bool more = rep.fuzzy.mean_op_count > rep.pid.mean_op_count;
      const auto md = slurp(out / (pid[i].scenario + "_report.md"));
      const bool row = md.find("| mean_op_count |") != std::string::npos;
      ok &= more && row;
      detail += fmt::format("{}{} {:.0f}/{:.1f}", detail.empty() ? "" : ", ", pid[i].scenario,
                            rep.fuzzy.mean_op_count, rep.pid.mean_op_count);
    }
  }
  return {ok, "fuzzy/pid mean ops: " + detail};
}

// 7 ------------------------------------------------------------------------
std::string drop_cost_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    const auto last = line.rfind(',');
    const auto prev = line.rfind(',', last - 1);
    out += line.substr(0, prev) + line.substr(last) + "\n";
  }
  return out;
}

Outcome determinism(const fs::path& work) {
  std::size_t files = 0;
  for (const char* name : kDefaultScenarios) {
    std::vector<fs::path> dirs{work / "c7a" / name, work / "c7b" / name};
    for (const auto& d : dirs) {
      if (run_cli({"compare", "--scenario", (kScenarios / name).string(), "--out", d.string(), "--seed", "31"}) != 0) {
        return {false, fmt::format("{}: compare failed", name)};
      }
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      if (entry.path().extension() != ".csv") continue;
      const auto other = dirs[1] / entry.path().filename();
      if (drop_cost_column(slurp(entry.path())) != drop_cost_column(slurp(other))) {
        return {false, fmt::format("{} differs", entry.path().filename().string())};
      }
      ++files;
    }
  }
  return {files > 0, fmt::format("{} CSV pairs byte-identical outside loop_cost_us", files)};
}

// 8 ------------------------------------------------------------------------
Outcome invariant_suite(const fs::path& work, const std::string& unit_binary) {
  const auto report = work / "unit.json";
  const auto t0 = Clock::now();
  const auto cmd = fmt::format("\"{}\" --gtest_brief=1 --gtest_output=json:\"{}\" > \"{}\" 2>&1", unit_binary,
                               report.string(), (work / "unit.log").string());
  const int rc = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  if (!fs::exists(report)) return {false, "unit test binary produced no report"};

  const auto j = nlohmann::json::parse(slurp(report));
  const char* required[] = {"PidProperty.EffortAndIntegralWithinLimits", "FuzzyProperty.CentroidHomogeneity",
                            "SensorProperty.AreaStrictlyIncreasesAsRangeShrinks",
                            "SensorProperty.XStrictlyMonotoneInBearing", "TraceCsvProperty.RoundTripIdentity",
                            "ExperimentsProperty.LateralOffsetMirrorSymmetry"};
  std::size_t props = 0;
  std::size_t props_ok = 0;
  std::size_t found = 0;
  for (const auto& suite : j["testsuites"]) {
    for (const auto& t : suite["testsuite"]) {
      const std::string full = suite["name"].get<std::string>() + "." + t["name"].get<std::string>();
      const bool passed = !t.contains("failures");
      if (full.find("Property") != std::string::npos) {
        ++props;
        props_ok += passed;
      }
      for (const char* r : required) found += full == r && passed;
    }
  }
  const bool ok = rc == 0 && secs < 60.0 && found == std::size(required) && props_ok == props;
  return {ok, fmt::format("{}/{} property tests passed ({} of {} required), {} tests total, exit {}, {:.1f} s",
                          props_ok, props, found, std::size(required), j["tests"].get<int>(), rc, secs)};
}

// 9 ------------------------------------------------------------------------
Outcome tuner_sanity(const fs::path& work) {
  const auto dir = work / "c9";
  fs::create_directories(dir);
  std::ofstream(dir / "grid.txt") << "kp = 0.5, 0.8, 1.1, 1.5, 2\nki = 0, 0.02, 0.05, 0.1, 0.2\nkd = 2, 4, 6\n";
  std::string err;
  if (run_cli({"tune", "--scenario", (kScenarios / "step_response.scn").string(), "--channel", "throttle",
               "--grid", (dir / "grid.txt").string(), "--objective", "itae", "--out", (dir / "out").string()},
              &err) != 0) {
    return {false, "tune failed: " + err};
  }
  const auto cfg = load_scenario(kScenarios / "step_response.scn");
  std::ifstream in(dir / "out" / "tune_results.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> recomputed;
  std::string best_gains;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) return {false, "malformed results row: " + line};
    if (recomputed.empty()) best_gains = fmt::format("kp {} ki {} kd {}", cells[1], cells[2], cells[3]);
    double itae = 0.0;
    std::stringstream files(cells[6]);
    std::string f;
    while (std::getline(files, f, ';')) {
      const auto t = read_trace_csv(dir / "out" / f);
      std::vector<double> ts;
      std::vector<double> es;
      for (const auto& r : t.records) {
        ts.push_back(r.t);
        es.push_back(r.area_error);
      }
      itae += objective_value(ts, es, cfg.dt, Objective::itae);
    }
    recomputed.push_back(itae);
  }
  if (recomputed.size() != 75) return {false, fmt::format("{} result rows, expected 75", recomputed.size())};
  const double best = recomputed.front();
  const double min_other = *std::min_element(recomputed.begin() + 1, recomputed.end());
  // Trace CSVs carry 9 significant digits, so allow for that rounding only.
  const bool ok = best <= min_other * (1 + 1e-7);
  return {ok, fmt::format("best {} ITAE {:.6g}; lowest other {:.6g}", best_gains, best, min_other)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance WORK_DIR UNIT_TEST_BINARY\n";
    return 2;
  }
  const fs::path work = argv[1];
  fs::remove_all(work);
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {1, "kinematics arc oracle", kinematics_oracle},
      {2, "centroid vs fine-grid integration", defuzz_oracle},
      {3, "stationary leader: stops before aligning", stationary_offset_stalls},
      {4, "moving leader: little steady-state error", moving_offset_converges},
      {5, "step response depends on start distance", step_dependence},
      {6, "fuzzy uses more operations than PID", [&] { return resource_comparison(work); }},
      {7, "compare is deterministic", [&] { return determinism(work); }},
      {8, "invariant property suite", [&] { return invariant_suite(work, argv[2]); }},
      {9, "ITAE grid search returns the minimum", [&] { return tuner_sanity(work); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << fmt::format("criterion {} {}: {} ({})\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail)
              << std::flush;
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
