#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "lfsim/op_counter.hpp"

namespace lfsim {

// Piecewise-linear membership function. A triangle (a, b, c) is stored as the
// trapezoid (a, b, b, c). Breakpoints are non-strictly ascending, so a == b
// gives a left shoulder and c == d a right shoulder.
class MembershipFunction {
 public:
  enum class Shape { triangular, trapezoidal };

  MembershipFunction() = default;
  static MembershipFunction triangle(double a, double b, double c);
  static MembershipFunction trapezoid(double a, double b, double c, double d);

  double degree(double x) const;
  double lower() const { return pts_[0]; }
  double upper() const { return pts_[3]; }
  Shape shape() const { return shape_; }
  // 3 values for a triangle, 4 for a trapezoid.
  std::vector<double> breakpoints() const;
  MembershipFunction scaled(double k) const;

  bool operator==(const MembershipFunction&) const = default;

 private:
  Shape shape_ = Shape::triangular;
  std::array<double, 4> pts_{};
};

struct FuzzySet {
  std::string label;
  MembershipFunction mf;

  bool operator==(const FuzzySet&) const = default;
};

struct Universe {
  double lo = 0.0;
  double hi = 0.0;
  double span() const { return hi - lo; }
};

// Two-input Mamdani controller: inputs are the error and its rate of change.
struct FuzzyConfig {
  std::vector<FuzzySet> error_sets;
  std::vector<FuzzySet> delta_sets;
  std::vector<FuzzySet> output_sets;
  // Row-major over (error set, delta set): rules[i * delta_sets.size() + j]
  // is the index into output_sets fired by error set i and delta set j.
  std::vector<std::size_t> rules;
  int grid_points = 201;

  std::size_t rule(std::size_t error_idx, std::size_t delta_idx) const {
    return rules[error_idx * delta_sets.size() + delta_idx];
  }
  // Throws lfsim::Error when a set list is empty, an input set list leaves
  // part of its universe uncovered, the rule table is not total, or the grid
  // is coarser than 201 points.
  void validate() const;

  // Same controller with every output breakpoint multiplied by k > 0.
  FuzzyConfig with_output_scale(double k) const;

  // Five 50%-overlap triangles (NL, NS, Z, PS, PL) per input over
  // [-error_span, error_span] and [-delta_span, delta_span] with shoulders at
  // the edges, five output triangles centred on -1, -0.5, 0, 0.5, 1 (times
  // output_span), and the diagonal PD-style 25-rule table.
  static FuzzyConfig standard(double error_span, double delta_span, double output_span = 1.0);
};

Universe universe_of(std::span<const FuzzySet> sets);

// Output membership sampled on a uniform grid from universe.lo to universe.hi.
struct Aggregate {
  Universe universe;
  std::vector<double> membership;

  double grid_value(std::size_t i) const;
};

// Degree of `value` in every set, in set order. Values outside the universe
// are clamped to its nearest edge first.
std::vector<double> fuzzify(double value, std::span<const FuzzySet> sets,
                            OpCounter* ops = nullptr);

// Min for rule strength, clip each output set at its strength, pointwise max
// to aggregate.
Aggregate infer(const FuzzyConfig& config, std::span<const double> error_degrees,
                std::span<const double> delta_degrees, OpCounter* ops = nullptr);

// Discrete centroid sum(w * u * mu) / sum(w * mu) with trapezoid weights w
// (1/2 at the two edge samples, 1 elsewhere), so shoulder sets that stay
// high at a universe edge are not over-weighted. Throws when the aggregate
// is zero everywhere, which means some input region has no covering rule.
double defuzz_centroid(const Aggregate& aggregate, OpCounter* ops = nullptr);

double fuzzy_step(const FuzzyConfig& config, double error, double error_delta,
                  OpCounter* ops = nullptr);

}  // namespace lfsim
