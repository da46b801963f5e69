#include "act/backtest/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "act/error.hpp"

namespace act {

namespace {

constexpr double kWidth = 800.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 160.0, kTop = 40.0, kBottom = 50.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string render_line_chart_svg(const std::string& title, const std::string& y_label,
                                  const std::vector<std::string>& x_labels, const std::vector<ChartSeries>& series) {
  const std::size_t n = x_labels.size();
  for (const auto& s : series) {
    if (s.values.size() != n) throw ShapeError("chart: series '" + s.name + "' does not match the x axis");
  }
  double lo = 0.0, hi = 0.0;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](std::size_t i) { return kLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0); };
  auto py = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"420\" viewBox=\"0 0 800 420\">\n";
  svg += "<rect width=\"800\" height=\"420\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + escape(title) +
         "</text>\n";
  svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", kLeft) +
         "\" y2=\"" + fmt("%.2f", kTop + plot_h) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", kTop + plot_h) + "\" x2=\"" +
         fmt("%.2f", kLeft + plot_w) + "\" y2=\"" + fmt("%.2f", kTop + plot_h) + "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    const double y = py(v);
    svg += "<line x1=\"" + fmt("%.2f", kLeft - 4) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
           fmt("%.2f", kLeft + plot_w) + "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.4f", v) + "</text>\n";
  }
  if (lo < 0.0 && hi > 0.0) {
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", py(0.0)) + "\" x2=\"" +
           fmt("%.2f", kLeft + plot_w) + "\" y2=\"" + fmt("%.2f", py(0.0)) + "\" stroke=\"#888888\"/>\n";
  }
  if (n > 0) {
    const std::size_t ticks[3] = {0, (n - 1) / 2, n - 1};
    for (std::size_t i : ticks) {
      svg += "<text x=\"" + fmt("%.2f", px(i)) + "\" y=\"" + fmt("%.2f", kTop + plot_h + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + escape(x_labels[i]) + "</text>\n";
    }
  }
  svg += "<text x=\"" + fmt("%.2f", kLeft + plot_w / 2) + "\" y=\"" + fmt("%.2f", kHeight - 8) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">date</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt("%.2f", kTop + plot_h / 2) + "\" transform=\"rotate(-90 16 " +
         fmt("%.2f", kTop + plot_h / 2) + ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(y_label) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    std::string points;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = series[s].values[i];
      if (!std::isfinite(v)) continue;
      if (!points.empty()) points += ' ';
      points += fmt("%.2f", px(i)) + ',' + fmt("%.2f", py(v));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    const double ly = kTop + 10 + 18.0 * static_cast<double>(s);
    const double lx = kLeft + plot_w + 12;
    svg += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" + fmt("%.2f", lx + 20) +
           "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", lx + 26) + "\" y=\"" + fmt("%.2f", ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series[s].name) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace act
