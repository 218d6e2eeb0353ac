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
#include "scoliotrack/image.hpp"

#include "scoliotrack/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace scoliotrack {

namespace {

void
check_dimensions(int width, int height)
{
  if (width < 1 || height < 1)
    throw InvalidArgument("image dimensions must be positive, got " + std::to_string(width) + "x" +
                          std::to_string(height));
}

std::uint8_t
clamp_u8(double v)
{
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

} // namespace

RasterImage::RasterImage(int width, int height, PixelFormat format)
  : width_(width)
  , height_(height)
  , format_(format)
{
  check_dimensions(width, height);
  data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                 static_cast<std::size_t>(channel_count(format)),
               0);
}

RasterImage::RasterImage(int width, int height, PixelFormat format, std::vector<std::uint8_t> data)
  : width_(width)
  , height_(height)
  , format_(format)
  , data_(std::move(data))
{
  check_dimensions(width, height);
  const auto expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(channel_count(format));
  if (data_.size() != expected)
    throw InvalidArgument("image buffer holds " + std::to_string(data_.size()) + " bytes, expected " +
                          std::to_string(expected));
}

void
RasterImage::fill(std::span<const std::uint8_t> value)
{
  if (value.size() != static_cast<std::size_t>(channels()))
    throw InvalidArgument("fill value has wrong channel count");
  for (std::size_t i = 0; i < data_.size(); i += value.size())
    std::copy(value.begin(), value.end(), data_.begin() + static_cast<std::ptrdiff_t>(i));
}

ColorTriple
rgb_to_hsv(ColorTriple pixel)
{
  const int r = pixel.c0, g = pixel.c1, b = pixel.c2;
  const int mx = std::max({ r, g, b });
  const int mn = std::min({ r, g, b });
  const int chroma = mx - mn;

  double hue_deg = 0.0;
  if (chroma != 0)
  {
    if (mx == r)
      hue_deg = 60.0 * (g - b) / chroma;
    else if (mx == g)
      hue_deg = 120.0 + 60.0 * (b - r) / chroma;
    else
      hue_deg = 240.0 + 60.0 * (r - g) / chroma;
    if (hue_deg < 0.0)
      hue_deg += 360.0;
  }
  const double sat = mx == 0 ? 0.0 : 255.0 * chroma / mx;
  return hsv(clamp_u8(hue_deg / 2.0), clamp_u8(sat), static_cast<std::uint8_t>(mx));
}

ColorTriple
hsv_to_rgb(ColorTriple pixel)
{
  const double hue_deg = std::fmod(2.0 * pixel.c0, 360.0);
  const double v = pixel.c2;
  const double chroma = v * pixel.c1 / 255.0;
  const double sector = hue_deg / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(sector, 2.0) - 1.0));
  const double m = v - chroma;

  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(sector) % 6)
  {
    case 0: r = chroma, g = x; break;
    case 1: r = x, g = chroma; break;
    case 2: g = chroma, b = x; break;
    case 3: g = x, b = chroma; break;
    case 4: r = x, b = chroma; break;
    default: r = chroma, b = x; break;
  }
  return rgb(clamp_u8(r + m), clamp_u8(g + m), clamp_u8(b + m));
}

RasterImage
to_gray(const RasterImage & image)
{
  if (image.format() == PixelFormat::Gray8)
    return image;
  RasterImage out(image.width(), image.height(), PixelFormat::Gray8);
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0, j = 0; j < dst.size(); ++j, i += 3)
  {
    const unsigned weighted = 299u * src[i] + 587u * src[i + 1] + 114u * src[i + 2];
    dst[j] = static_cast<std::uint8_t>((weighted + 500u) / 1000u);
  }
  return out;
}

RasterImage
to_rgb(const RasterImage & image)
{
  if (image.format() == PixelFormat::Rgb8)
    return image;
  RasterImage out(image.width(), image.height(), PixelFormat::Rgb8);
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[3 * i] = dst[3 * i + 1] = dst[3 * i + 2] = src[i];
  return out;
}

RasterImage
extract_channel(const RasterImage & image, int channel)
{
  if (image.format() != PixelFormat::Rgb8)
    throw InvalidArgument("extract_channel requires an RGB image");
  if (channel < 0 || channel > 2)
    throw InvalidArgument("channel index must be 0, 1 or 2, got " + std::to_string(channel));
  RasterImage out(image.width(), image.height(), PixelFormat::Gray8);
  const auto src = image.data();
  auto dst = out.data();
  for (std::size_t j = 0; j < dst.size(); ++j)
    dst[j] = src[3 * j + static_cast<std::size_t>(channel)];
  return out;
}

RasterImage
resample_nearest(const RasterImage & image, const RigidTransform & transform)
{
  return resample_nearest(image, transform, image.width(), image.height());
}

RasterImage
resample_nearest(const RasterImage & image, const RigidTransform & transform, int out_width, int out_height)
{
  if (!transform.valid())
    throw InvalidArgument("resample_nearest needs a transform with positive scale");

  RasterImage out(out_width, out_height, image.format());
  const RigidTransform inv = transform.inverse();
  const auto m = inv.linear();
  const int nc = image.channels();
  const auto src = image.data();
  auto dst = out.data();

  for (int y = 0; y < out_height; ++y)
  {
    for (int x = 0; x < out_width; ++x)
    {
      const double dx = x - inv.pivot.x;
      const double dy = y - inv.pivot.y;
      const double sx = m[0] * dx + m[1] * dy + inv.anchor.x;
      const double sy = m[2] * dx + m[3] * dy + inv.anchor.y;
      const double fx = std::floor(sx + 0.5);
      const double fy = std::floor(sy + 0.5);
      if (!(fx >= 0.0 && fy >= 0.0 && fx < image.width() && fy < image.height()))
        continue;
      const std::size_t si =
        (static_cast<std::size_t>(fy) * static_cast<std::size_t>(image.width()) + static_cast<std::size_t>(fx)) *
        static_cast<std::size_t>(nc);
      const std::size_t di =
        (static_cast<std::size_t>(y) * static_cast<std::size_t>(out_width) + static_cast<std::size_t>(x)) *
        static_cast<std::size_t>(nc);
      for (int c = 0; c < nc; ++c)
        dst[di + static_cast<std::size_t>(c)] = src[si + static_cast<std::size_t>(c)];
    }
  }
  return out;
}

} // namespace scoliotrack
