/*=========================================================================
 *
 *  Copyright The scoliotrack Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *         http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace scoliotrack {

/// Integer pixel position. x is the column (rightward), y the row (downward).
struct PixelCoord
{
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord &, const PixelCoord &) = default;
};

/// Real-valued point in the same raster frame as PixelCoord.
struct Point2
{
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2 &, const Point2 &) = default;

  Point2 operator+(const Point2 & o) const { return { x + o.x, y + o.y }; }
  Point2 operator-(const Point2 & o) const { return { x - o.x, y - o.y }; }
  Point2 operator*(double s) const { return { x * s, y * s }; }
};

inline Point2 to_point(PixelCoord p) { return { static_cast<double>(p.x), static_cast<double>(p.y) }; }

inline PixelCoord round_to_pixel(Point2 p)
{
  return { static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)) };
}

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::remainder(a, two_pi);
  if (a <= -std::numbers::pi)
    a += two_pi;
  return a;
}

/// Uniform scale and rotation about `pivot`, followed by the translation that
/// carries `pivot` onto `anchor`:
///
///   p -> scale * R(angle) * (p - pivot) + anchor
///
/// R is the usual [cos -sin; sin cos] matrix applied to raster coordinates, so a
/// positive angle turns +x towards +y, which is clockwise on screen.
struct RigidTransform
{
  double scale = 1.0;
  double angle = 0.0;
  Point2 pivot{};
  Point2 anchor{};

  static RigidTransform identity() { return {}; }

  /// Linear part as row-major {a, b, c, d} = [[a, b], [c, d]].
  std::array<double, 4> linear() const
  {
    const double c = scale * std::cos(angle);
    const double s = scale * std::sin(angle);
    return { c, -s, s, c };
  }

  double determinant() const
  {
    const auto m = linear();
    return m[0] * m[3] - m[1] * m[2];
  }

  Point2 apply(Point2 p) const
  {
    const auto m = linear();
    const Point2 d = p - pivot;
    return { m[0] * d.x + m[1] * d.y + anchor.x, m[2] * d.x + m[3] * d.y + anchor.y };
  }

  /// Requires scale > 0.
  RigidTransform inverse() const { return { 1.0 / scale, -angle, anchor, pivot }; }

  bool valid() const { return std::isfinite(scale) && scale > 0.0 && std::isfinite(angle); }
};

} // namespace scoliotrack
