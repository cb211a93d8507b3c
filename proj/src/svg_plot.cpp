#include "lfsim/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/core.h>

#include "lfsim/actuation.hpp"
#include "lfsim/error.hpp"
#include "lfsim/metrics.hpp"

namespace lfsim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 80.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

bool is_pwm(const std::string& c) { return c.size() > 4 && c.ends_with("_pwm"); }

std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(lo <= hi)) return {0.0, 1.0};
  if (hi - lo < 1e-12) {
    const double pad = std::max(1.0, std::abs(lo) * 0.1);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

double map(double v, Range r, double px_lo, double px_hi) {
  return px_lo + (v - r.lo) / (r.hi - r.lo) * (px_hi - px_lo);
}

}  // namespace

std::vector<std::string> default_plot_channels(const Trace& trace) {
  const std::string signal(primary_signal(trace));
  return {signal, std::string(pwm_column_for(signal))};
}

void write_plot_svg(const Trace& trace, const std::vector<std::string>& channels,
                    std::ostream& out) {
  if (channels.empty()) throw Error("plot needs at least one channel");
  for (const auto& c : channels) {
    if (!is_column(c)) throw Error(fmt::format("unknown plot channel '{}'", c));
  }

  const auto& recs = trace.records;
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y_top = kTop;
  const double y_bot = kHeight - kBottom;

  Range tr{0.0, 1.0};
  if (!recs.empty()) tr = recs.size() > 1 ? Range{recs.front().t, recs.back().t}
                                          : padded(recs.front().t, recs.front().t);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  bool any_left = false;
  bool any_right = false;
  for (const auto& c : channels) {
    if (is_pwm(c)) {
      any_right = true;
      continue;
    }
    any_left = true;
    for (const auto& r : recs) {
      const double v = column_value(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const Range left = recs.empty() ? Range{} : padded(lo, hi);
  const Range right{kPwmMin, kPwmMax};

  out << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n';
  out << fmt::format(
      R"(<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}">)",
      kWidth, kHeight)
      << '\n';
  out << fmt::format(R"(<rect x="0" y="0" width="{}" height="{}" fill="white"/>)", kWidth, kHeight)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{} ({})</text>)",
                     kWidth / 2, escape(trace.scenario), escape(trace.label))
      << '\n';

  // Frame and ticks.
  out << fmt::format(R"(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)",
                     x0, y_top, x1 - x0, y_bot - y_top)
      << '\n';
  out << R"(<g font-family="sans-serif" font-size="11">)" << '\n';
  for (int k = 0; k <= 5; ++k) {
    const double f = k / 5.0;
    const double xt = x0 + f * (x1 - x0);
    out << fmt::format(R"(<line x1="{0:.2f}" y1="{1}" x2="{0:.2f}" y2="{2}" stroke="black"/>)", xt,
                       y_bot, y_bot + 5)
        << '\n';
    out << fmt::format(R"(<text x="{:.2f}" y="{}" text-anchor="middle">{:.3g}</text>)", xt,
                       y_bot + 18, tr.lo + f * (tr.hi - tr.lo))
        << '\n';
    const double yt = y_bot - f * (y_bot - y_top);
    if (any_left) {
      out << fmt::format(R"(<line x1="{}" y1="{:.2f}" x2="{}" y2="{:.2f}" stroke="black"/>)", x0 - 5,
                         yt, x0, yt)
          << '\n';
      out << fmt::format(R"(<text x="{}" y="{:.2f}" text-anchor="end">{:.4g}</text>)", x0 - 8,
                         yt + 4, left.lo + f * (left.hi - left.lo))
          << '\n';
    }
    if (any_right) {
      out << fmt::format(R"(<line x1="{}" y1="{:.2f}" x2="{}" y2="{:.2f}" stroke="black"/>)", x1, yt,
                         x1 + 5, yt)
          << '\n';
      out << fmt::format(R"(<text x="{}" y="{:.2f}" text-anchor="start">{:.4g}</text>)", x1 + 8,
                         yt + 4, right.lo + f * (right.hi - right.lo))
          << '\n';
    }
  }
  out << "</g>\n";

  // Axis labels.
  std::string left_label;
  std::string right_label;
  for (const auto& c : channels) {
    auto& l = is_pwm(c) ? right_label : left_label;
    if (!l.empty()) l += ", ";
    l += c;
  }
  out << fmt::format(R"(<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">time (s)</text>)",
                     (x0 + x1) / 2, kHeight - 15)
      << '\n';
  if (any_left) {
    const double cy = (y_top + y_bot) / 2;
    out << fmt::format(R"svg(<text x="20" y="{0}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>)svg",
                       cy, escape(left_label))
        << '\n';
  }
  if (any_right) {
    const double cy = (y_top + y_bot) / 2;
    const double rx = kWidth - 20;
    out << fmt::format(R"svg(<text x="{0}" y="{1}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(90 {0} {1})">{2} (PWM)</text>)svg",
                       rx, cy, escape(right_label))
        << '\n';
  }

  // Data.
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    const auto& c = channels[ci];
    const char* colour = kPalette[ci % std::size(kPalette)];
    const Range yr = is_pwm(c) ? right : left;
    if (recs.size() == 1) {
      const double px = (x0 + x1) / 2;
      const double py = map(column_value(recs[0], c), yr, y_bot, y_top);
      out << fmt::format(R"(<circle class="series" data-channel="{}" cx="{:.2f}" cy="{:.2f}" r="3" fill="{}"/>)",
                         escape(c), px, py, colour)
          << '\n';
      continue;
    }
    std::string pts;
    pts.reserve(recs.size() * 16);
    for (const auto& r : recs) {
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", map(r.t, tr, x0, x1), map(column_value(r, c), yr, y_bot, y_top));
    }
    out << fmt::format(R"(<polyline class="series" data-channel="{}" fill="none" stroke="{}" stroke-width="1.2" points="{}"/>)",
                       escape(c), colour, pts)
        << '\n';
  }

  // Legend.
  out << R"(<g font-family="sans-serif" font-size="11">)" << '\n';
  for (std::size_t ci = 0; ci < channels.size(); ++ci) {
    const double ly = y_top + 14 + 16 * static_cast<double>(ci);
    const double lx = x0 + 10;
    const auto& c = channels[ci];
    out << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)", lx,
                       ly - 4, lx + 20, ly - 4, kPalette[ci % std::size(kPalette)])
        << '\n';
    out << fmt::format(R"(<text x="{}" y="{}">{}{}</text>)", lx + 26, ly, escape(c),
                       is_pwm(c) ? " (right axis)" : "")
        << '\n';
  }
  out << "</g>\n</svg>\n";
}

void write_plot_svg(const Trace& trace, const std::vector<std::string>& channels,
                    const std::filesystem::path& path) {
  for (const auto& c : channels) {
    if (!is_column(c)) throw Error(fmt::format("unknown plot channel '{}'", c));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  write_plot_svg(trace, channels, out);
  out.flush();
  if (!out) throw Error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace lfsim
