#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lfsim/scenario.hpp"
#include "lfsim/trace.hpp"

namespace lfsim {

enum class Objective { itae, ise, rms };
std::string_view to_string(Objective o);
Objective parse_objective(std::string_view s);

// Candidate values per tuned parameter, each strictly ascending. A PID
// channel takes kp/ki/kd lists (an omitted gain stays at the scenario's
// value); a fuzzy channel takes output_scale, a factor applied to every
// output set.
struct GainGrid {
  std::vector<double> kp;
  std::vector<double> ki;
  std::vector<double> kd;
  std::vector<double> output_scale;

  bool empty() const { return kp.empty() && ki.empty() && kd.empty() && output_scale.empty(); }
};

// `name = v1, v2, ...` lines; `#` starts a comment.
GainGrid parse_grid(std::string_view text);
GainGrid load_grid(const std::filesystem::path& path);

struct TuneSpec {
  Channel channel = Channel::throttle;
  GainGrid grid;
  Objective objective = Objective::itae;
  ScenarioConfig scenario;
};

struct Candidate {
  std::size_t index = 0;  // position in grid enumeration order
  // (kp, ki, kd) for PID; (output_scale) for fuzzy.
  std::vector<double> params;
  double score = 0.0;
  double control_effort_tv = 0.0;
  // Relative to the tuning output directory; empty when traces are not kept.
  std::vector<std::string> trace_files;
};

struct TuneResult {
  Channel channel = Channel::throttle;
  ControllerKind kind = ControllerKind::pid;
  Objective objective = Objective::itae;
  std::vector<std::string> param_names;
  // Best first: score, then control_effort_tv, then parameters
  // lexicographically.
  std::vector<Candidate> ranked;
};

// Error column a channel is scored on.
std::string_view objective_signal(Channel channel);

// ITAE = sum t*|e|*dt, ISE = sum e^2*dt, rms = sqrt(mean e^2), with dt the
// record spacing and t measured from the trace start.
double objective_value(const Trace& trace, std::string_view signal, Objective objective);

// Same sums over the raw (t, e) columns of a trace, for recomputation from
// stored CSVs.
double objective_value(const std::vector<double>& t, const std::vector<double>& e, double dt,
                       Objective objective);

// Sorts best first: lower score, then lower control_effort_tv, then
// parameters in lexicographic order.
void rank_candidates(std::vector<Candidate>& candidates);

// Scenario with the tuned channel set to one candidate's parameters.
ScenarioConfig apply_candidate(const ScenarioConfig& base, Channel channel,
                               const std::vector<double>& params);

// Exhaustive search. Candidates run on a worker pool; when `out_dir` is
// non-empty the traces are written to out_dir/runs/cand_NNN[_k].csv in
// candidate order. Throws on an empty grid or a grid that does not match the
// channel's controller kind.
TuneResult tune(const TuneSpec& spec, const std::filesystem::path& out_dir = {},
                unsigned workers = 0);

// rank, parameters, score, control_effort_tv, traces
void write_tune_csv(const TuneResult& result, std::ostream& out);
void write_tune_csv(const TuneResult& result, const std::filesystem::path& path);

}  // namespace lfsim
