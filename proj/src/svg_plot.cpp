#include "omd/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace omd {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const char* series_color(int style) {
  static const char* palette[] = {"#1f5fa8", "#c03b2b", "#3c8a4d", "#7a4fa0"};
  return palette[style % 4];
}

std::string series_dash(int style) {
  if (style == 0) return " stroke-dasharray=\"2 5\"";
  if (style == 1) return " stroke-dasharray=\"9 6\"";
  return "";
}

}  // namespace

void write_svg_chart(const std::filesystem::path& path,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<PlotSeries>& series) {
  if (series.empty()) {
    throw std::invalid_argument("write_svg_chart: no series");
  }
  const double width = 640, height = 480;
  const double left = 80, right = 24, top = 24, bottom = 56;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
    throw std::invalid_argument("write_svg_chart: series have no points");
  }
  if (xmax - xmin < 1e-12) { xmin -= 1.0; xmax += 1.0; }
  if (ymax - ymin < 1e-12) {
    const double pad = std::max(1.0, std::abs(ymax)) * 0.1;
    ymin -= pad;
    ymax += pad;
  }
  const auto sx = [&](double x) {
    return left + (x - xmin) / (xmax - xmin) * plot_w;
  };
  const auto sy = [&](double y) {
    return top + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes and ticks.
  svg << "<g stroke=\"#333333\" stroke-width=\"1\">\n"
      << "<line x1=\"" << px(left) << "\" y1=\"" << px(top + plot_h)
      << "\" x2=\"" << px(left + plot_w) << "\" y2=\"" << px(top + plot_h)
      << "\"/>\n"
      << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\""
      << px(left) << "\" y2=\"" << px(top + plot_h) << "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    svg << "<line x1=\"" << px(sx(fx)) << "\" y1=\"" << px(top + plot_h)
        << "\" x2=\"" << px(sx(fx)) << "\" y2=\"" << px(top + plot_h + 5)
        << "\"/>\n"
        << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(sy(fy))
        << "\" x2=\"" << px(left) << "\" y2=\"" << px(sy(fy)) << "\"/>\n";
  }
  svg << "</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    svg << "<text x=\"" << px(sx(fx)) << "\" y=\"" << px(top + plot_h + 20)
        << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n"
        << "<text x=\"" << px(left - 8) << "\" y=\"" << px(sy(fy) + 4)
        << "\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
  }
  svg << "<text x=\"" << px(left + plot_w / 2) << "\" y=\""
      << px(height - 12) << "\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(x_label) << "</text>\n"
      << "<text x=\"18\" y=\"" << px(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 "
      << px(top + plot_h / 2) << ")\">" << xml_escape(y_label) << "</text>\n"
      << "</g>\n";

  for (const auto& s : series) {
    if (s.points.empty()) continue;
    svg << "<polyline fill=\"none\" stroke=\"" << series_color(s.style_index)
        << "\" stroke-width=\"1.8\"" << series_dash(s.style_index)
        << " points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) svg << ' ';
      svg << px(sx(s.points[i].first)) << ',' << px(sy(s.points[i].second));
    }
    svg << "\"/>\n";
    if (s.style_index == 0) {
      for (const auto& [x, y] : s.points) {
        svg << "<circle cx=\"" << px(sx(x)) << "\" cy=\"" << px(sy(y))
            << "\" r=\"3\" fill=\"" << series_color(s.style_index) << "\"/>\n";
      }
    }
  }

  // Legend, top right.
  double ly = top + 8;
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\">\n";
  for (const auto& s : series) {
    const double lx = left + plot_w - 150;
    svg << "<line x1=\"" << px(lx) << "\" y1=\"" << px(ly + 4) << "\" x2=\""
        << px(lx + 30) << "\" y2=\"" << px(ly + 4) << "\" stroke=\""
        << series_color(s.style_index) << "\" stroke-width=\"1.8\""
        << series_dash(s.style_index) << "/>\n"
        << "<text x=\"" << px(lx + 38) << "\" y=\"" << px(ly + 8) << "\">"
        << xml_escape(s.label) << "</text>\n";
    ly += 18;
  }
  svg << "</g>\n</svg>\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << svg.str();
}

std::vector<std::filesystem::path> write_summary_panels(
    const std::vector<SummaryRow>& rows, const std::filesystem::path& dir) {
  if (rows.empty()) {
    throw std::invalid_argument("write_summary_panels: empty summary");
  }
  std::filesystem::create_directories(dir);

  struct Panel {
    const char* file;
    const char* column;
    double (*get)(const SummaryRow&);
  };
  const Panel panels[] = {
      {"nonproductive_steps.svg", "T_J",
       [](const SummaryRow& r) { return double(r.T_J); }},
      {"wall_time_s.svg", "wall_time_s",
       [](const SummaryRow& r) { return r.wall_time_s; }},
      {"delta.svg", "delta", [](const SummaryRow& r) { return r.delta; }},
      {"mean_productive_objective.svg", "mean_productive_objective",
       [](const SummaryRow& r) { return r.mean_productive_objective; }},
  };

  std::vector<std::string> algorithms;
  for (const auto& r : rows) {
    if (r.error.empty() &&
        std::find(algorithms.begin(), algorithms.end(), r.algorithm) ==
            algorithms.end()) {
      algorithms.push_back(r.algorithm);
    }
  }
  std::sort(algorithms.begin(), algorithms.end());

  std::vector<std::filesystem::path> written;
  for (const auto& panel : panels) {
    std::vector<PlotSeries> series;
    for (std::size_t a = 0; a < algorithms.size(); ++a) {
      // Mean over seeds at each T.
      std::map<int, std::pair<double, int>> by_t;
      for (const auto& r : rows) {
        if (r.algorithm != algorithms[a] || !r.error.empty()) continue;
        const double v = panel.get(r);
        if (std::isnan(v)) continue;
        auto& acc = by_t[r.T];
        acc.first += v;
        acc.second += 1;
      }
      if (by_t.empty()) continue;
      PlotSeries s;
      s.label = algorithms[a];
      s.style_index = int(a);
      for (const auto& [t, acc] : by_t) {
        s.points.emplace_back(double(t), acc.first / acc.second);
      }
      series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    const auto path = dir / panel.file;
    write_svg_chart(path, "T", panel.column, series);
    written.push_back(path);
  }
  return written;
}

}  // namespace omd
