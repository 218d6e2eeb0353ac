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
#include "scoliotrack/compositing.hpp"

#include "scoliotrack/error.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace scoliotrack {

namespace {

template <typename Plot>
void
for_each_line_pixel(PixelCoord a, PixelCoord b, Plot && plot)
{
  // Bresenham, all octants.
  const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  for (;;)
  {
    plot(a.x, a.y);
    if (a == b)
      break;
    const int e2 = 2 * err;
    if (e2 >= dy)
    {
      err += dy;
      a.x += sx;
    }
    if (e2 <= dx)
    {
      err += dx;
      a.y += sy;
    }
  }
}

template <typename Plot>
void
for_each_disc_pixel(PixelCoord c, int radius, int width, int height, Plot && plot)
{
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius)
      {
        const int x = c.x + dx, y = c.y + dy;
        if (x >= 0 && y >= 0 && x < width && y < height)
          plot(x, y);
      }
}

PixelCoord
checked_pixel(Point2 p, int width, int height, const char * what)
{
  const PixelCoord q = round_to_pixel(p);
  if (q.x < 0 || q.y < 0 || q.x >= width || q.y >= height)
    throw InvalidArgument(std::string("overlay: ") + what + " at (" + std::to_string(q.x) + ", " +
                          std::to_string(q.y) + ") lies outside the image");
  return q;
}

template <typename Plot>
void
for_each_overlay_pixel(int width, int height, const LandmarkSet & set, int disc_radius, Plot && plot_spine,
                       Plot && plot_disc)
{
  std::vector<PixelCoord> spine;
  spine.reserve(set.spine.size());
  for (const auto & p : set.spine)
    spine.push_back(checked_pixel(p, width, height, "spine point"));
  const PixelCoord c7 = checked_pixel(set.c7, width, height, "C7");
  const PixelCoord left = checked_pixel(set.psis_left, width, height, "left PSIS");
  const PixelCoord right = checked_pixel(set.psis_right, width, height, "right PSIS");
  const PixelCoord ic = checked_pixel(set.ic, width, height, "IC");

  for (std::size_t i = 0; i < spine.size(); ++i)
  {
    if (i + 1 < spine.size())
      for_each_line_pixel(spine[i], spine[i + 1], [&](int x, int y) { plot_spine(x, y, 0); });
    else
      plot_spine(spine[i].x, spine[i].y, 0);
  }
  for_each_disc_pixel(c7, disc_radius, width, height, [&](int x, int y) { plot_disc(x, y, 1); });
  for_each_disc_pixel(left, disc_radius, width, height, [&](int x, int y) { plot_disc(x, y, 2); });
  for_each_disc_pixel(right, disc_radius, width, height, [&](int x, int y) { plot_disc(x, y, 2); });
  for_each_disc_pixel(ic, disc_radius, width, height, [&](int x, int y) { plot_disc(x, y, 3); });
}

} // namespace

RasterImage
alpha_blend(const RasterImage & source, const RasterImage & target, double alpha)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("blending alpha must lie in [0, 1], got " + std::to_string(alpha));
  if (source.width() != target.width() || source.height() != target.height() || source.format() != target.format())
    throw InvalidArgument("alpha_blend: source " + std::to_string(source.width()) + "x" +
                          std::to_string(source.height()) + " does not match target " +
                          std::to_string(target.width()) + "x" + std::to_string(target.height()));

  RasterImage out(target.width(), target.height(), target.format());
  const auto s = source.data();
  const auto t = target.data();
  auto o = out.data();
  const double beta = 1.0 - alpha;
  for (std::size_t i = 0; i < o.size(); ++i)
  {
    // Both terms are non-negative, so half-up equals half-away-from-zero.
    const double v = alpha * s[i] + beta * t[i];
    o[i] = static_cast<std::uint8_t>(std::floor(v + 0.5));
  }
  return out;
}

RasterImage
overlay_landmarks(const RasterImage & image, const LandmarkSet & set, const OverlayPalette & palette)
{
  RasterImage out = to_rgb(image);
  const ColorTriple colors[] = { palette.spine, palette.c7, palette.psis, palette.ic };
  auto paint = [&](int x, int y, int role) {
    const ColorTriple & c = colors[role];
    out.at(x, y, 0) = c.c0;
    out.at(x, y, 1) = c.c1;
    out.at(x, y, 2) = c.c2;
  };
  for_each_overlay_pixel(out.width(), out.height(), set, palette.disc_radius, paint, paint);
  return out;
}

BinaryMask
overlay_coverage(int width, int height, const LandmarkSet & set, int disc_radius)
{
  BinaryMask mask(width, height);
  auto mark = [&](int x, int y, int) { mask.set(x, y); };
  for_each_overlay_pixel(width, height, set, disc_radius, mark, mark);
  return mask;
}

RasterImage
render_followup(const RasterImage & target, std::span<const RasterImage> registered_sources, double alpha)
{
  RasterImage acc = target;
  for (std::size_t i = 0; i < registered_sources.size(); ++i)
  {
    const RasterImage & src = registered_sources[i];
    if (src.width() != target.width() || src.height() != target.height() || src.format() != target.format())
      throw InvalidArgument("render_followup: source " + std::to_string(i) +
                            " is not registered into the target frame");
    acc = alpha_blend(src, acc, alpha);
  }
  return acc;
}

} // namespace scoliotrack
