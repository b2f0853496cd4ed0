#pragma once

#include "latmdp/types.hpp"

#include <array>

namespace latmdp::envs {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kBackground{200, 200, 200};
inline constexpr Rgb kAgentRed{220, 30, 30};
inline constexpr Rgb kGoalGreen{30, 180, 30};
inline constexpr Rgb kGoalYellow{235, 200, 20};
inline constexpr Rgb kGoalPurple{150, 30, 200};
inline constexpr std::array<Rgb, 3> kDistractorPalette{
    Rgb{40, 70, 220}, Rgb{220, 40, 200}, Rgb{30, 200, 210}};

Observation make_canvas(int height, int width, Rgb color = kBackground);

void fill_rect(Observation& img, int y0, int x0, int y1, int x1, Rgb color);
void fill_circle(Observation& img, double cy, double cx, double radius, Rgb color);
/// Fills a triangle given by three (y, x) vertices, pixel-center coverage.
void fill_triangle(Observation& img, const std::array<double, 2>& a,
                   const std::array<double, 2>& b, const std::array<double, 2>& c,
                   Rgb color);

}  // namespace latmdp::envs
