#include "tumor_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace tumor_cli {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 42.0;
constexpr double kBottom = 54.0;

const char* const kStrokes[] = {"#2b6cb0", "#c05621", "#2f855a", "#6b46c1"};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void take(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (lo > hi) {  // nothing finite at all
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (lo == hi) {
      const double d = lo == 0.0 ? 1.0 : std::fabs(lo) * 0.1;
      lo -= d;
      hi += d;
      return;
    }
    const double d = 0.05 * (hi - lo);
    lo -= d;
    hi += d;
  }
};

std::string escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_line_svg(std::ostream& out, const std::vector<Series>& series,
                    const PlotOptions& opt) {
  Range rx, ry;
  for (const Series& s : series) {
    for (double v : s.x) rx.take(v);
    for (double v : s.y) ry.take(v);
  }
  if (opt.zero_line) ry.take(0.0);
  for (double m : opt.markers) rx.take(m);
  rx.pad();
  ry.pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
  auto py = [&](double v) { return kHeight - kBottom - (v - ry.lo) / (ry.hi - ry.lo) * plot_h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << escape(opt.title) << "</text>\n";

  // Frame and ticks.
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
      << plot_h << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / ticks;
    const double gx = px(fx);
    out << "<line x1=\"" << num(gx) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << num(gx)
        << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << num(gx) << "\" y=\"" << kHeight - kBottom + 19
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n";
    const double fy = ry.lo + (ry.hi - ry.lo) * i / ticks;
    const double gy = py(fy);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << num(gy) << "\" x2=\"" << kLeft
        << "\" y2=\"" << num(gy) << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(opt.xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << kTop + plot_h / 2 << ")\">" << escape(opt.ylabel)
      << "</text>\n";

  if (opt.zero_line && ry.lo < 0.0 && ry.hi > 0.0) {
    const double gy = py(0.0);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << num(gy) << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << num(gy) << "\" stroke=\"#999999\" stroke-dasharray=\"5,4\"/>\n";
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* stroke = kStrokes[k % (sizeof kStrokes / sizeof kStrokes[0])];
    std::string points;
    auto flush = [&]() {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << stroke
            << "\" stroke-width=\"1.3\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += num(px(s.x[i]));
      points += ',';
      points += num(py(s.y[i]));
    }
    flush();
  }

  for (double m : opt.markers) {
    out << "<circle cx=\"" << num(px(m)) << "\" cy=\"" << num(py(0.0))
        << "\" r=\"4\" fill=\"none\" stroke=\"#c53030\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << num(px(m)) << "\" y=\"" << num(py(0.0) - 8)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(m)
        << "</text>\n";
  }

  out << "</svg>\n";
}

}  // namespace tumor_cli
