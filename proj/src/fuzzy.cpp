#include "lfsim/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/core.h>

#include "lfsim/error.hpp"

namespace lfsim {

MembershipFunction MembershipFunction::triangle(double a, double b, double c) {
  if (!(a <= b && b <= c) || !(a < c)) {
    throw Error(fmt::format("triangle breakpoints must ascend: {} {} {}", a, b, c));
  }
  MembershipFunction mf;
  mf.shape_ = Shape::triangular;
  mf.pts_ = {a, b, b, c};
  return mf;
}

MembershipFunction MembershipFunction::trapezoid(double a, double b, double c, double d) {
  if (!(a <= b && b <= c && c <= d) || !(a < d)) {
    throw Error(fmt::format("trapezoid breakpoints must ascend: {} {} {} {}", a, b, c, d));
  }
  MembershipFunction mf;
  mf.shape_ = Shape::trapezoidal;
  mf.pts_ = {a, b, c, d};
  return mf;
}

double MembershipFunction::degree(double x) const {
  const auto [a, b, c, d] = pts_;
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  if (x <= c) return 1.0;
  return (d - x) / (d - c);
}

std::vector<double> MembershipFunction::breakpoints() const {
  if (shape_ == Shape::triangular) return {pts_[0], pts_[1], pts_[3]};
  return {pts_[0], pts_[1], pts_[2], pts_[3]};
}

MembershipFunction MembershipFunction::scaled(double k) const {
  MembershipFunction mf = *this;
  for (double& p : mf.pts_) p *= k;
  return mf;
}

Universe universe_of(std::span<const FuzzySet> sets) {
  if (sets.empty()) throw Error("fuzzy set list is empty");
  Universe u{sets.front().mf.lower(), sets.front().mf.upper()};
  for (const auto& s : sets) {
    u.lo = std::min(u.lo, s.mf.lower());
    u.hi = std::max(u.hi, s.mf.upper());
  }
  return u;
}

namespace {

// Membership functions are linear between consecutive breakpoints, so
// testing every breakpoint and every midpoint between them decides coverage
// exactly.
void check_complete(std::span<const FuzzySet> sets, const char* which) {
  std::set<double> knots;
  for (const auto& s : sets) {
    for (double p : s.mf.breakpoints()) knots.insert(p);
  }
  std::vector<double> probes(knots.begin(), knots.end());
  const std::size_t n = probes.size();
  for (std::size_t i = 0; i + 1 < n; ++i) probes.push_back(0.5 * (probes[i] + probes[i + 1]));

  for (double x : probes) {
    const bool covered =
        std::any_of(sets.begin(), sets.end(), [x](const FuzzySet& s) { return s.mf.degree(x) > 0.0; });
    if (!covered) {
      throw Error(fmt::format("{} sets leave {} uncovered", which, x));
    }
  }
}

void check_labels(std::span<const FuzzySet> sets, const char* which) {
  std::set<std::string> seen;
  for (const auto& s : sets) {
    if (s.label.empty()) throw Error(fmt::format("{} set with empty label", which));
    if (!seen.insert(s.label).second) {
      throw Error(fmt::format("duplicate {} set label '{}'", which, s.label));
    }
  }
}

}  // namespace

void FuzzyConfig::validate() const {
  if (error_sets.empty() || delta_sets.empty() || output_sets.empty()) {
    throw Error("fuzzy config needs error, delta and output sets");
  }
  check_labels(error_sets, "error");
  check_labels(delta_sets, "delta");
  check_labels(output_sets, "output");
  check_complete(error_sets, "error");
  check_complete(delta_sets, "delta");
  if (rules.size() != error_sets.size() * delta_sets.size()) {
    throw Error(fmt::format("rule table has {} entries, expected {}", rules.size(),
                            error_sets.size() * delta_sets.size()));
  }
  for (std::size_t r : rules) {
    if (r >= output_sets.size()) throw Error("rule references an unknown output set");
  }
  if (grid_points < 201) throw Error("fuzzy output grid needs at least 201 points");
}

FuzzyConfig FuzzyConfig::with_output_scale(double k) const {
  if (!(k > 0.0)) throw Error("output scale must be positive");
  FuzzyConfig c = *this;
  for (auto& s : c.output_sets) s.mf = s.mf.scaled(k);
  return c;
}

FuzzyConfig FuzzyConfig::standard(double error_span, double delta_span, double output_span) {
  static const char* const kLabels[] = {"NL", "NS", "Z", "PS", "PL"};
  auto inputs = [](double s) {
    std::vector<FuzzySet> sets;
    sets.push_back({kLabels[0], MembershipFunction::triangle(-s, -s, -0.5 * s)});
    sets.push_back({kLabels[1], MembershipFunction::triangle(-s, -0.5 * s, 0.0)});
    sets.push_back({kLabels[2], MembershipFunction::triangle(-0.5 * s, 0.0, 0.5 * s)});
    sets.push_back({kLabels[3], MembershipFunction::triangle(0.0, 0.5 * s, s)});
    sets.push_back({kLabels[4], MembershipFunction::triangle(0.5 * s, s, s)});
    return sets;
  };

  FuzzyConfig c;
  c.error_sets = inputs(error_span);
  c.delta_sets = inputs(delta_span);
  for (int i = 0; i < 5; ++i) {
    const double centre = 0.5 * (i - 2) * output_span;
    c.output_sets.push_back({kLabels[i], MembershipFunction::triangle(
                                             centre - 0.5 * output_span, centre,
                                             centre + 0.5 * output_span)});
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      c.rules.push_back(static_cast<std::size_t>(std::clamp(i + j - 2, 0, 4)));
    }
  }
  return c;
}

double Aggregate::grid_value(std::size_t i) const {
  const std::size_t n = membership.size();
  if (n < 2) return universe.lo;
  return universe.lo + universe.span() * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::vector<double> fuzzify(double value, std::span<const FuzzySet> sets, OpCounter* ops) {
  const Universe u = universe_of(sets);
  const double x = std::clamp(value, u.lo, u.hi);
  tally(ops, 2);
  std::vector<double> degrees;
  degrees.reserve(sets.size());
  for (const auto& s : sets) {
    degrees.push_back(s.mf.degree(x));
    // Two range compares, one branch compare, and a subtract/divide pair.
    tally(ops, 5);
  }
  return degrees;
}

Aggregate infer(const FuzzyConfig& config, std::span<const double> error_degrees,
                std::span<const double> delta_degrees, OpCounter* ops) {
  if (error_degrees.size() != config.error_sets.size() ||
      delta_degrees.size() != config.delta_sets.size()) {
    throw Error("infer: degree vectors do not match the config");
  }

  // Pointwise max over clipped rule outputs equals, per output set, clipping
  // at the strongest rule that fires it.
  std::vector<double> strength(config.output_sets.size(), 0.0);
  for (std::size_t i = 0; i < error_degrees.size(); ++i) {
    for (std::size_t j = 0; j < delta_degrees.size(); ++j) {
      const double w = std::min(error_degrees[i], delta_degrees[j]);
      double& s = strength[config.rule(i, j)];
      s = std::max(s, w);
      tally(ops, 2);
    }
  }

  Aggregate agg;
  agg.universe = universe_of(config.output_sets);
  agg.membership.assign(static_cast<std::size_t>(config.grid_points), 0.0);
  for (std::size_t g = 0; g < agg.membership.size(); ++g) {
    const double u = agg.grid_value(g);
    tally(ops, 3);
    double mu = 0.0;
    for (std::size_t k = 0; k < strength.size(); ++k) {
      if (strength[k] == 0.0) {
        tally(ops, 1);
        continue;
      }
      mu = std::max(mu, std::min(strength[k], config.output_sets[k].mf.degree(u)));
      tally(ops, 8);
    }
    agg.membership[g] = mu;
  }
  return agg;
}

double defuzz_centroid(const Aggregate& aggregate, OpCounter* ops) {
  double num = 0.0;
  double den = 0.0;
  const std::size_t n = aggregate.membership.size();
  for (std::size_t i = 0; i < n; ++i) {
    // Trapezoid weights: the two edge samples each stand for half a cell.
    const double mu = (i == 0 || i + 1 == n) ? 0.5 * aggregate.membership[i] : aggregate.membership[i];
    num += aggregate.grid_value(i) * mu;
    den += mu;
    tally(ops, 6);
  }
  if (!(den > 0.0)) {
    throw Error("defuzz_centroid: aggregate is zero everywhere (incomplete rule coverage)");
  }
  tally(ops, 1);
  return num / den;
}

double fuzzy_step(const FuzzyConfig& config, double error, double error_delta, OpCounter* ops) {
  if (!std::isfinite(error) || !std::isfinite(error_delta)) {
    throw Error("fuzzy_step: non-finite input");
  }
  const auto e = fuzzify(error, config.error_sets, ops);
  const auto d = fuzzify(error_delta, config.delta_sets, ops);
  return defuzz_centroid(infer(config, e, d, ops), ops);
}

}  // namespace lfsim
