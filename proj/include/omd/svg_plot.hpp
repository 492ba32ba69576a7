#ifndef OMD_SVG_PLOT_HPP
#define OMD_SVG_PLOT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "omd/io.hpp"

namespace omd {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x
  int style_index = 0;  // 0: dotted with markers, 1: dashed, 2+: solid
};

// Self-contained SVG line chart; no external resources.
void write_svg_chart(const std::filesystem::path& path,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series);

// The four panels of the experiment figure: non-productive steps, wall time,
// guaranteed accuracy delta, and mean productive objective, each against T
// with one series per algorithm (values averaged over seeds).
std::vector<std::filesystem::path> write_summary_panels(
    const std::vector<SummaryRow>& rows, const std::filesystem::path& dir);

}  // namespace omd

#endif  // OMD_SVG_PLOT_HPP
