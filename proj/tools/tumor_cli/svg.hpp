#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tumor_cli {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool zero_line = false;            // horizontal y = 0 guide
  std::vector<double> markers;       // x positions marked on y = 0
};

// Minimal static plot: axes, ticks, one polyline per series.  Non-finite
// samples split the polyline so gaps stay visible as gaps.
void write_line_svg(std::ostream& out, const std::vector<Series>& series,
                    const PlotOptions& opt);

}  // namespace tumor_cli
