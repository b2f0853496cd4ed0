#pragma once

#include <array>
#include <string>
#include <vector>

namespace latmdp::analysis {

/// Scatter of (x, y) points colored by a scalar value (viridis-like ramp).
std::string svg_scatter(const std::vector<std::array<double, 3>>& points_xyv,
                        const std::string& title, int size_px = 640);

struct SvgSeries {
  std::string label;
  std::vector<double> x, mean, variance;  // variance drawn as a band
};

std::string svg_curves(const std::vector<SvgSeries>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label,
                       int width_px = 720, int height_px = 480);

}  // namespace latmdp::analysis
