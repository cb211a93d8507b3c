#include "lfsim/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/core.h>

#include "lfsim/error.hpp"
#include "lfsim/experiments.hpp"
#include "lfsim/metrics.hpp"
#include "lfsim/trace_csv.hpp"

namespace lfsim {

std::string_view to_string(Objective o) {
  switch (o) {
    case Objective::itae: return "itae";
    case Objective::ise: return "ise";
    case Objective::rms: return "rms";
  }
  return "?";
}

Objective parse_objective(std::string_view s) {
  if (s == "itae") return Objective::itae;
  if (s == "ise") return Objective::ise;
  if (s == "rms") return Objective::rms;
  throw Error(fmt::format("unknown objective '{}' (expected itae, ise or rms)", s));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_values(std::string_view list, std::string_view key, std::size_t line) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto pos = list.find(',', start);
    if (pos == std::string_view::npos) pos = list.size();
    const auto tok = trim(list.substr(start, pos - start));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
      throw ParseError(fmt::format("{}: '{}' is not a number", key, tok), line);
    }
    if (!out.empty() && !(v > out.back())) {
      throw ParseError(fmt::format("{}: values must be strictly ascending", key), line);
    }
    out.push_back(v);
    start = pos + 1;
  }
  return out;
}

}  // namespace

GainGrid parse_grid(std::string_view text) {
  GainGrid g;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'name = v1, v2, ...'", line_no);
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    std::vector<double>* slot = nullptr;
    if (key == "kp") slot = &g.kp;
    else if (key == "ki") slot = &g.ki;
    else if (key == "kd") slot = &g.kd;
    else if (key == "output_scale") slot = &g.output_scale;
    else throw ParseError(fmt::format("unknown grid parameter '{}'", key), line_no);
    if (!seen.emplace(std::string(key), line_no).second) {
      throw ParseError(fmt::format("duplicate grid parameter '{}'", key), line_no);
    }
    if (value.empty()) throw ParseError(fmt::format("{}: empty value list", key), line_no);
    *slot = parse_values(value, key, line_no);
  }
  if (g.empty()) throw Error("grid is empty");
  return g;
}

GainGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open grid file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_grid(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()), 0);
  }
}

std::string_view objective_signal(Channel channel) {
  return channel == Channel::steering ? "pixel_error_x" : "area_error";
}

double objective_value(const std::vector<double>& t, const std::vector<double>& e, double dt,
                       Objective objective) {
  if (t.size() != e.size()) throw Error("objective: time and error columns differ in length");
  if (e.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    switch (objective) {
      case Objective::itae: acc += (t[i] - t[0]) * std::abs(e[i]) * dt; break;
      case Objective::ise: acc += e[i] * e[i] * dt; break;
      case Objective::rms: acc += e[i] * e[i]; break;
    }
  }
  if (objective == Objective::rms) return std::sqrt(acc / static_cast<double>(e.size()));
  return acc;
}

double objective_value(const Trace& trace, std::string_view signal, Objective objective) {
  std::vector<double> t;
  std::vector<double> e;
  t.reserve(trace.records.size());
  e.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    t.push_back(r.t);
    e.push_back(column_value(r, signal));
  }
  return objective_value(t, e, trace.config.dt, objective);
}

ScenarioConfig apply_candidate(const ScenarioConfig& base, Channel channel,
                               const std::vector<double>& params) {
  ScenarioConfig c = base;
  auto& ch = c.channel(channel);
  if (ch.kind == ControllerKind::pid) {
    if (params.size() != 3) throw Error("a PID candidate needs kp, ki and kd");
    ch.pid->gains.kp = params[0];
    ch.pid->gains.ki = params[1];
    ch.pid->gains.kd = params[2];
  } else {
    if (params.size() != 1) throw Error("a fuzzy candidate needs one output_scale");
    ch.fuzzy->rules = ch.fuzzy->rules.with_output_scale(params[0]);
  }
  return c;
}

void rank_candidates(std::vector<Candidate>& candidates) {
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    if (a.control_effort_tv != b.control_effort_tv) return a.control_effort_tv < b.control_effort_tv;
    return a.params < b.params;
  });
}

namespace {

std::vector<std::vector<double>> enumerate(const TuneSpec& spec, ControllerKind kind) {
  const auto& g = spec.grid;
  if (g.empty()) throw Error("grid is empty");
  std::vector<std::vector<double>> out;
  if (kind == ControllerKind::fuzzy) {
    if (!g.kp.empty() || !g.ki.empty() || !g.kd.empty()) {
      throw Error("the tuned channel is fuzzy; its grid takes output_scale only");
    }
    for (double s : g.output_scale) out.push_back({s});
    return out;
  }
  if (!g.output_scale.empty()) {
    throw Error("the tuned channel is PID; output_scale applies to fuzzy channels");
  }
  const auto& gains = spec.scenario.channel(spec.channel).pid->gains;
  const auto or_current = [](const std::vector<double>& v, double cur) {
    return v.empty() ? std::vector<double>{cur} : v;
  };
  for (double kp : or_current(g.kp, gains.kp)) {
    for (double ki : or_current(g.ki, gains.ki)) {
      for (double kd : or_current(g.kd, gains.kd)) out.push_back({kp, ki, kd});
    }
  }
  return out;
}

}  // namespace

TuneResult tune(const TuneSpec& spec, const std::filesystem::path& out_dir, unsigned workers) {
  spec.scenario.validate();
  const auto& ch = spec.scenario.channel(spec.channel);
  if (ch.locked) throw Error(fmt::format("the {} channel is locked", to_string(spec.channel)));
  if (spec.channel == Channel::steering && spec.scenario.archetype == Archetype::step_response) {
    throw Error("step-response runs lock steering; tune the throttle channel instead");
  }

  TuneResult result;
  result.channel = spec.channel;
  result.kind = ch.kind;
  result.objective = spec.objective;
  result.param_names = ch.kind == ControllerKind::pid
                           ? std::vector<std::string>{"kp", "ki", "kd"}
                           : std::vector<std::string>{"output_scale"};

  const auto grid = enumerate(spec, ch.kind);
  // Reject invalid gain combinations before any run starts.
  std::vector<ScenarioConfig> configs;
  configs.reserve(grid.size());
  for (const auto& p : grid) {
    configs.push_back(apply_candidate(spec.scenario, spec.channel, p));
    configs.back().validate();
  }

  const std::filesystem::path runs = out_dir.empty() ? out_dir : out_dir / "runs";
  if (!runs.empty()) std::filesystem::create_directories(runs);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));

  std::vector<std::promise<std::vector<Trace>>> slots(grid.size());
  std::vector<std::future<std::vector<Trace>>> ready;
  for (auto& s : slots) ready.push_back(s.get_future());
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < grid.size(); i = next++) {
        try {
          slots[i].set_value(run_archetype(configs[i]));
        } catch (...) {
          slots[i].set_exception(std::current_exception());
        }
      }
    });
  }

  const auto signal = objective_signal(spec.channel);
  const auto pwm = pwm_column_for(signal);
  std::exception_ptr failure;
  // Single collector: consumes results in candidate order and writes files.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      const auto traces = ready[i].get();
      Candidate c;
      c.index = i;
      c.params = grid[i];
      for (std::size_t k = 0; k < traces.size(); ++k) {
        c.score += objective_value(traces[k], signal, spec.objective);
        const auto& recs = traces[k].records;
        for (std::size_t r = 1; r < recs.size(); ++r) {
          c.control_effort_tv += std::abs(column_value(recs[r], pwm) - column_value(recs[r - 1], pwm));
        }
        if (!runs.empty()) {
          const auto file = traces.size() == 1 ? fmt::format("cand_{:03}.csv", i)
                                               : fmt::format("cand_{:03}_{}.csv", i, k);
          write_trace_csv(traces[k], runs / file);
          c.trace_files.push_back("runs/" + file);
        }
      }
      result.ranked.push_back(std::move(c));
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  rank_candidates(result.ranked);
  return result;
}

void write_tune_csv(const TuneResult& result, std::ostream& out) {
  out << "rank";
  for (const auto& n : result.param_names) out << ',' << n;
  out << ",score,control_effort_tv,traces\n";
  for (std::size_t i = 0; i < result.ranked.size(); ++i) {
    const auto& c = result.ranked[i];
    out << i + 1;
    for (double p : c.params) out << fmt::format(",{:.9g}", p);
    std::string files;
    for (const auto& f : c.trace_files) {
      if (!files.empty()) files += ';';
      files += f;
    }
    out << fmt::format(",{:.9g},{:.9g},{}\n", c.score, c.control_effort_tv, files);
  }
}

void write_tune_csv(const TuneResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_tune_csv(result, out);
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace lfsim
