#include "latmdp/envs/render.hpp"

#include <algorithm>
#include <cmath>

namespace latmdp::envs {
namespace {

void put(Observation& img, int y, int x, Rgb c) {
  if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
  img.at(y, x, 0) = c[0];
  img.at(y, x, 1) = c[1];
  img.at(y, x, 2) = c[2];
}

double edge(double ay, double ax, double by, double bx, double py, double px) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

Observation make_canvas(int height, int width, Rgb color) {
  Observation img;
  img.height = height;
  img.width = width;
  img.pixels.resize(static_cast<std::size_t>(height) * width * 3);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) put(img, y, x, color);
  return img;
}

void fill_rect(Observation& img, int y0, int x0, int y1, int x1, Rgb color) {
  y0 = std::max(y0, 0);
  x0 = std::max(x0, 0);
  y1 = std::min(y1, img.height);
  x1 = std::min(x1, img.width);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) put(img, y, x, color);
}

void fill_circle(Observation& img, double cy, double cx, double radius, Rgb color) {
  const int y0 = static_cast<int>(std::floor(cy - radius));
  const int y1 = static_cast<int>(std::ceil(cy + radius));
  const int x0 = static_cast<int>(std::floor(cx - radius));
  const int x1 = static_cast<int>(std::ceil(cx + radius));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dy = y + 0.5 - cy;
      const double dx = x + 0.5 - cx;
      if (dy * dy + dx * dx <= r2) put(img, y, x, color);
    }
}

void fill_triangle(Observation& img, const std::array<double, 2>& a,
                   const std::array<double, 2>& b, const std::array<double, 2>& c,
                   Rgb color) {
  const double area = edge(a[0], a[1], b[0], b[1], c[0], c[1]);
  if (area == 0.0) return;
  const double sign = area > 0 ? 1.0 : -1.0;
  const int y0 = static_cast<int>(std::floor(std::min({a[0], b[0], c[0]})));
  const int y1 = static_cast<int>(std::ceil(std::max({a[0], b[0], c[0]})));
  const int x0 = static_cast<int>(std::floor(std::min({a[1], b[1], c[1]})));
  const int x1 = static_cast<int>(std::ceil(std::max({a[1], b[1], c[1]})));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double py = y + 0.5, px = x + 0.5;
      const double w0 = sign * edge(a[0], a[1], b[0], b[1], py, px);
      const double w1 = sign * edge(b[0], b[1], c[0], c[1], py, px);
      const double w2 = sign * edge(c[0], c[1], a[0], a[1], py, px);
      if (w0 >= 0 && w1 >= 0 && w2 >= 0) put(img, y, x, color);
    }
}

}  // namespace latmdp::envs
