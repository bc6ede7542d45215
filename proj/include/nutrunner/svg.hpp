#pragma once

#include <string>
#include <vector>

namespace nutrunner {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;  // CSS color
};

struct SvgBand {
  double x0{0.0};
  double x1{0.0};
  std::string color;  // fill for the stage band
};

// Renders a self-contained line chart (axes, ticks, optional stage bands,
// legend) with no external dependencies. Output is deterministic for
// identical inputs.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<SvgSeries>& series, const std::vector<SvgBand>& bands = {});

}  // namespace nutrunner
