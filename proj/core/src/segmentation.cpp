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
#include "scoliotrack/segmentation.hpp"

#include "scoliotrack/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace scoliotrack {

namespace {

// Clockwise on screen (y down): E, SE, S, SW, W, NW, N, NE.
constexpr std::array<int, 8> kDirX{ 1, 1, 0, -1, -1, -1, 0, 1 };
constexpr std::array<int, 8> kDirY{ 0, 1, 1, 1, 0, -1, -1, -1 };

int
direction_of(int dx, int dy)
{
  for (int d = 0; d < 8; ++d)
    if (kDirX[d] == dx && kDirY[d] == dy)
      return d;
  return -1;
}

std::vector<PixelCoord>
disc_offsets(int radius)
{
  if (radius < 1)
    throw InvalidArgument("structuring element radius must be >= 1, got " + std::to_string(radius));
  std::vector<PixelCoord> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius)
        offsets.push_back({ dx, dy });
  return offsets;
}

// Moore-neighbour trace of the outer contour of the region carrying `label`,
// starting from its first pixel in raster order.
double
trace_perimeter(const std::vector<int> & labels, int width, int height, int label, PixelCoord start)
{
  auto inside = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < width && y < height &&
           labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] ==
             label;
  };

  // Returns the direction to the next contour pixel and updates `backtrack`
  // (direction from the new pixel to the background pixel preceding it).
  auto step = [&](PixelCoord p, int & backtrack) -> int {
    for (int i = 1; i <= 8; ++i)
    {
      const int d = (backtrack + i) % 8;
      if (inside(p.x + kDirX[d], p.y + kDirY[d]))
      {
        const int prev = (backtrack + i - 1) % 8;
        const PixelCoord next{ p.x + kDirX[d], p.y + kDirY[d] };
        backtrack = direction_of(p.x + kDirX[prev] - next.x, p.y + kDirY[prev] - next.y);
        return d;
      }
    }
    return -1;
  };

  int backtrack = 4; // west of the first raster pixel is never in the region
  const int first = step(start, backtrack);
  if (first < 0)
    return 0.0;

  constexpr double diag = std::numbers::sqrt2;
  double length = 0.0;
  PixelCoord p = start;
  int d = first;
  // Bounded by the worst case of visiting every pixel from each of its 8 sides.
  const std::size_t guard = 8 * labels.size() + 8;
  for (std::size_t n = 0; n < guard; ++n)
  {
    length += (d % 2 == 0) ? 1.0 : diag;
    p = { p.x + kDirX[d], p.y + kDirY[d] };
    d = step(p, backtrack);
    if (p == start && d == first)
      break;
  }
  return length;
}

} // namespace

BinaryMask::BinaryMask(int width, int height)
  : width_(width)
  , height_(height)
{
  if (width < 1 || height < 1)
    throw InvalidArgument("mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

std::size_t
BinaryMask::count() const
{
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{ 1 }));
}

RasterImage
BinaryMask::to_image() const
{
  std::vector<std::uint8_t> px(bits_.size());
  std::transform(bits_.begin(), bits_.end(), px.begin(), [](std::uint8_t b) { return b ? 255 : 0; });
  return RasterImage(width_, height_, PixelFormat::Gray8, std::move(px));
}

void
ThresholdBand::validate() const
{
  if (lower.space != space || upper.space != space)
    throw InvalidArgument("threshold band bounds are not in the band's color space");
  if (lower.c0 > upper.c0 || lower.c1 > upper.c1 || lower.c2 > upper.c2)
    throw InvalidArgument("threshold band lower bound exceeds upper bound");
}

bool
band_contains(const ThresholdBand & band, ColorTriple v)
{
  return band.lower.c0 <= v.c0 && v.c0 <= band.upper.c0 && band.lower.c1 <= v.c1 && v.c1 <= band.upper.c1 &&
         band.lower.c2 <= v.c2 && v.c2 <= band.upper.c2;
}

BinaryMask
band_threshold(const RasterImage & image, const ThresholdBand & band)
{
  band.validate();
  if (image.format() != PixelFormat::Rgb8)
    throw InvalidArgument("band_threshold requires an RGB image");

  BinaryMask mask(image.width(), image.height());
  const bool to_hsv = band.space == ColorSpace::Hsv;
  for (int y = 0; y < image.height(); ++y)
  {
    for (int x = 0; x < image.width(); ++x)
    {
      const auto px = image.pixel(x, y);
      ColorTriple v = rgb(px[0], px[1], px[2]);
      if (to_hsv)
        v = rgb_to_hsv(v);
      if (band_contains(band, v))
        mask.set(x, y);
    }
  }
  return mask;
}

BinaryMask
erode(const BinaryMask & mask, int radius)
{
  const auto offsets = disc_offsets(radius);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
  {
    for (int x = 0; x < mask.width(); ++x)
    {
      if (!mask.get(x, y))
        continue;
      const bool keep = std::all_of(offsets.begin(), offsets.end(), [&](PixelCoord o) {
        const int nx = x + o.x, ny = y + o.y;
        return !mask.contains(nx, ny) || mask.get(nx, ny);
      });
      if (keep)
        out.set(x, y);
    }
  }
  return out;
}

BinaryMask
dilate(const BinaryMask & mask, int radius)
{
  const auto offsets = disc_offsets(radius);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
  {
    for (int x = 0; x < mask.width(); ++x)
    {
      if (!mask.get(x, y))
        continue;
      for (const auto o : offsets)
        if (mask.contains(x + o.x, y + o.y))
          out.set(x + o.x, y + o.y);
    }
  }
  return out;
}

BinaryMask
morph_open(const BinaryMask & mask, int radius)
{
  return dilate(erode(mask, radius), radius);
}

BinaryMask
morph_close(const BinaryMask & mask, int radius)
{
  return erode(dilate(mask, radius), radius);
}

BinaryMask
canny_edges(const RasterImage & gray, double low, double high)
{
  if (gray.format() != PixelFormat::Gray8)
    throw InvalidArgument("canny_edges requires a grayscale image");
  if (!(0.0 <= low && low <= high && high <= 255.0))
    throw InvalidArgument("canny thresholds must satisfy 0 <= low <= high <= 255");

  const int w = gray.width(), h = gray.height();
  auto px = [&](int x, int y) {
    return static_cast<double>(gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)));
  };
  const auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };

  std::vector<double> gx(static_cast<std::size_t>(w) * h), gy(gx.size()), mag(gx.size());
  for (int y = 0; y < h; ++y)
  {
    for (int x = 0; x < w; ++x)
    {
      const double sx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double sy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      // Sobel weights sum to 4 per side; scale so a 0->255 step reads 255.
      gx[idx(x, y)] = sx / 4.0;
      gy[idx(x, y)] = sy / 4.0;
      mag[idx(x, y)] = std::hypot(sx, sy) / 4.0;
    }
  }

  const double tan22 = std::tan(std::numbers::pi / 8.0);
  const double tan67 = std::tan(3.0 * std::numbers::pi / 8.0);
  auto mag_at = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag[idx(x, y)]; };

  // 0 = suppressed, 1 = weak, 2 = strong
  std::vector<std::uint8_t> cls(mag.size(), 0);
  for (int y = 0; y < h; ++y)
  {
    for (int x = 0; x < w; ++x)
    {
      const double m = mag[idx(x, y)];
      if (m <= low)
        continue;
      const double ax = std::abs(gx[idx(x, y)]), ay = std::abs(gy[idx(x, y)]);
      int dx = 0, dy = 0;
      if (ay <= tan22 * ax)
        dx = 1;
      else if (ay > tan67 * ax)
        dy = 1;
      else
      {
        dx = 1;
        dy = (gx[idx(x, y)] * gy[idx(x, y)] > 0) ? 1 : -1;
      }
      // Strict on one side, non-strict on the other, so plateaus keep exactly one pixel.
      if (m > mag_at(x - dx, y - dy) && m >= mag_at(x + dx, y + dy))
        cls[idx(x, y)] = m > high ? 2 : 1;
    }
  }

  BinaryMask edges(w, h);
  std::vector<PixelCoord> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (cls[idx(x, y)] == 2)
      {
        edges.set(x, y);
        stack.push_back({ x, y });
      }
  while (!stack.empty())
  {
    const PixelCoord p = stack.back();
    stack.pop_back();
    for (int d = 0; d < 8; ++d)
    {
      const int nx = p.x + kDirX[d], ny = p.y + kDirY[d];
      if (nx < 0 || ny < 0 || nx >= w || ny >= h)
        continue;
      if (cls[idx(nx, ny)] == 1 && !edges.get(nx, ny))
      {
        edges.set(nx, ny);
        stack.push_back({ nx, ny });
      }
    }
  }
  return edges;
}

Point2
Region::centroid() const
{
  double sx = 0.0, sy = 0.0;
  for (const auto & p : pixels)
  {
    sx += p.x;
    sy += p.y;
  }
  const double n = static_cast<double>(pixels.size());
  return { sx / n, sy / n };
}

std::vector<Region>
connected_components(const BinaryMask & mask, Connectivity connectivity)
{
  const int w = mask.width(), h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
  const auto idx = [w](int x, int y) {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
  };
  const int step = connectivity == Connectivity::Four ? 2 : 1;

  std::vector<Region> regions;
  std::vector<PixelCoord> stack;
  for (int y = 0; y < h; ++y)
  {
    for (int x = 0; x < w; ++x)
    {
      if (!mask.get(x, y) || labels[idx(x, y)] != 0)
        continue;

      Region region;
      region.label = static_cast<int>(regions.size()) + 1;
      region.bbox = { x, y, x, y };
      labels[idx(x, y)] = region.label;
      stack.push_back({ x, y });
      while (!stack.empty())
      {
        const PixelCoord p = stack.back();
        stack.pop_back();
        region.pixels.push_back(p);
        region.bbox.min_x = std::min(region.bbox.min_x, p.x);
        region.bbox.min_y = std::min(region.bbox.min_y, p.y);
        region.bbox.max_x = std::max(region.bbox.max_x, p.x);
        region.bbox.max_y = std::max(region.bbox.max_y, p.y);
        for (int d = 0; d < 8; d += step)
        {
          const int nx = p.x + kDirX[d], ny = p.y + kDirY[d];
          if (mask.get_or_false(nx, ny) && labels[idx(nx, ny)] == 0)
          {
            labels[idx(nx, ny)] = region.label;
            stack.push_back({ nx, ny });
          }
        }
      }
      std::sort(region.pixels.begin(), region.pixels.end(),
                [](PixelCoord a, PixelCoord b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      region.area = region.pixels.size();
      region.perimeter = trace_perimeter(labels, w, h, region.label, region.pixels.front());
      regions.push_back(std::move(region));
    }
  }
  return regions;
}

ShapeFeatures
shape_features(const Region & region)
{
  if (region.area == 0 || region.pixels.empty())
    throw InvalidArgument("shape features of an empty region are undefined");
  if (region.perimeter <= 0.0)
    throw InvalidArgument("shape features undefined: region " + std::to_string(region.label) +
                          " has zero perimeter");
  return { static_cast<double>(region.bbox.width()) / region.bbox.height(),
           4.0 * std::numbers::pi * static_cast<double>(region.area) / (region.perimeter * region.perimeter) };
}

} // namespace scoliotrack
