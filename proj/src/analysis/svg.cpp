#include "latmdp/analysis/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace latmdp::analysis {
namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double span() const { return hi > lo ? hi - lo : 1.0; }
};

std::string color_ramp(double t) {
  // Dark blue -> teal -> yellow.
  t = std::clamp(t, 0.0, 1.0);
  const double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  const double pos = t * 2.0;
  const int i = pos < 1.0 ? 0 : 1;
  const double f = pos - i;
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(stops[i][0] + f * (stops[i + 1][0] - stops[i][0])),
                static_cast<int>(stops[i][1] + f * (stops[i + 1][1] - stops[i][1])),
                static_cast<int>(stops[i][2] + f * (stops[i + 1][2] - stops[i][2])));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string svg_scatter(const std::vector<std::array<double, 3>>& points_xyv,
                        const std::string& title, int size_px) {
  const double margin = 48;
  Range rx, ry, rv;
  for (const auto& p : points_xyv) {
    rx.add(p[0]);
    ry.add(p[1]);
    rv.add(p[2]);
  }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_px << "\" height=\""
      << size_px << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << size_px / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  if (points_xyv.empty()) {
    out << "<text x=\"" << size_px / 2 << "\" y=\"" << size_px / 2
        << "\" text-anchor=\"middle\" fill=\"#888\">(empty)</text>\n</svg>\n";
    return out.str();
  }
  const double plot = size_px - 2 * margin;
  for (const auto& p : points_xyv) {
    const double x = margin + (p[0] - rx.lo) / rx.span() * plot;
    const double y = size_px - margin - (p[1] - ry.lo) / ry.span() * plot;
    const double t = (p[2] - rv.lo) / rv.span();
    out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3.5\" fill=\""
        << color_ramp(t) << "\" fill-opacity=\"0.85\"/>\n";
  }
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot << "\" height=\""
      << plot << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"" << size_px - margin + 16 << "\" font-size=\"11\">"
      << num(rx.lo) << "</text>\n";
  out << "<text x=\"" << size_px - margin << "\" y=\"" << size_px - margin + 16
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(rx.hi) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

std::string svg_curves(const std::vector<SvgSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label, int width_px,
                       int height_px) {
  const double margin = 56;
  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      rx.add(s.x[i]);
      const double sd = s.variance.empty() ? 0.0 : std::sqrt(std::max(0.0, s.variance[i]));
      ry.add(s.mean[i] - sd);
      ry.add(s.mean[i] + sd);
    }
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px << "\" height=\""
      << height_px << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width_px / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";
  const double pw = width_px - 2 * margin, ph = height_px - 2 * margin;
  auto X = [&](double v) { return margin + (v - rx.lo) / rx.span() * pw; };
  auto Y = [&](double v) { return height_px - margin - (v - ry.lo) / ry.span() * ph; };

  int color = 0;
  for (const auto& s : series) {
    const char* c = kSeriesColors[color % 5];
    if (!s.variance.empty() && s.x.size() > 1) {
      out << "<path d=\"M";
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << num(X(s.x[i])) << " " << num(Y(s.mean[i] + std::sqrt(std::max(0.0, s.variance[i]))))
            << (i + 1 < s.x.size() ? " L" : " ");
      for (std::size_t i = s.x.size(); i-- > 0;)
        out << "L" << num(X(s.x[i])) << " "
            << num(Y(s.mean[i] - std::sqrt(std::max(0.0, s.variance[i])))) << " ";
      out << "Z\" fill=\"" << c << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out << num(X(s.x[i])) << "," << num(Y(s.mean[i])) << " ";
    out << "\"/>\n";
    out << "<text x=\"" << width_px - margin - 4 << "\" y=\"" << margin + 16 + 16 * color
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << c << "\">" << s.label
        << "</text>\n";
    ++color;
  }
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << pw << "\" height=\""
      << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << width_px / 2 << "\" y=\"" << height_px - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << height_px / 2
      << "\" font-size=\"12\" transform=\"rotate(-90 16 " << height_px / 2 << ")\">" << y_label
      << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << height_px - margin
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(ry.lo) << "</text>\n";
  out << "<text x=\"" << margin - 4 << "\" y=\"" << margin + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(ry.hi) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

}  // namespace latmdp::analysis
