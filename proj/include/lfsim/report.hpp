#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lfsim/metrics.hpp"
#include "lfsim/trace.hpp"

namespace lfsim {

enum class Winner { pid, fuzzy, tie };
std::string_view to_string(Winner w);

// Two values tie when |a - b| <= max(absolute, relative * max(|a|, |b|)).
// Every metric is lower-is-better.
struct TieBand {
  double relative = 0.02;
  double absolute = 1e-12;
};

struct Tolerances {
  TieBand fallback;
  std::map<std::string, TieBand, std::less<>> per_metric;

  const TieBand& band(std::string_view metric) const;
};

struct MetricRow {
  std::string metric;
  std::optional<double> pid;
  std::optional<double> fuzzy;
  Winner winner = Winner::tie;
  // |pid - fuzzy|; absent when either side is absent.
  std::optional<double> margin;
};

struct ComparisonReport {
  std::string scenario;
  std::string signal;
  MetricSet pid;
  MetricSet fuzzy;
  std::vector<MetricRow> rows;
  std::vector<std::string> notes;
};

// A present value beats an absent one; two absent values tie.
Winner pick_winner(std::optional<double> pid, std::optional<double> fuzzy, const TieBand& band);

// Both traces must come from the same scenario. `metrics` selects and orders
// the rows; empty means every entry of kMetricNames.
ComparisonReport compare(const Trace& pid, const Trace& fuzzy, const Tolerances& tolerances = {},
                         const std::vector<std::string>& metrics = {});

// "%.6g", or "n/a" for an absent value.
std::string format_cell(std::optional<double> v);

// Markdown table: metric | pid | fuzzy | winner | margin, then the notes.
void write_report(const ComparisonReport& report, std::ostream& out);
void write_report(const ComparisonReport& report, const std::filesystem::path& path);

// One row per trace with every selected metric as a column.
void write_metric_summary(const std::vector<Trace>& traces, const std::vector<MetricSet>& metrics,
                          const std::vector<std::string>& names, std::ostream& out);
void write_metric_summary(const std::vector<Trace>& traces, const std::vector<MetricSet>& metrics,
                          const std::vector<std::string>& names, const std::filesystem::path& path);

}  // namespace lfsim
