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

#include "scoliotrack/geometry.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace scoliotrack {

enum class PixelFormat
{
  Rgb8,
  Gray8
};

constexpr int channel_count(PixelFormat f) { return f == PixelFormat::Rgb8 ? 3 : 1; }

/// Row-major, channel-interleaved 8-bit raster. Origin top-left, y down.
/// Pixels outside the frame are treated as black wherever a lookup can miss.
class RasterImage
{
public:
  /// Black image. Throws InvalidArgument on a zero or negative dimension.
  RasterImage(int width, int height, PixelFormat format);

  /// Adopts `data`; its size must equal width * height * channel_count(format).
  RasterImage(int width, int height, PixelFormat format, std::vector<std::uint8_t> data);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  PixelFormat format() const noexcept { return format_; }
  int channels() const noexcept { return channel_count(format_); }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  std::uint8_t & at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> pixel(int x, int y) const
  {
    return { data_.data() + index(x, y, 0), static_cast<std::size_t>(channels()) };
  }

  std::span<const std::uint8_t> data() const noexcept { return data_; }
  std::span<std::uint8_t> data() noexcept { return data_; }

  void fill(std::span<const std::uint8_t> value);

  friend bool operator==(const RasterImage &, const RasterImage &) = default;

private:
  std::size_t index(int x, int y, int c) const noexcept
  {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) *
             static_cast<std::size_t>(channels()) +
           static_cast<std::size_t>(c);
  }

  int width_;
  int height_;
  PixelFormat format_;
  std::vector<std::uint8_t> data_;
};

enum class ColorSpace
{
  Rgb,
  Hsv
};

/// Three 8-bit channel values tagged with their color space. In HSV the hue
/// runs over [0, 180] (two degrees per step); saturation and value over [0, 255].
struct ColorTriple
{
  std::uint8_t c0 = 0;
  std::uint8_t c1 = 0;
  std::uint8_t c2 = 0;
  ColorSpace space = ColorSpace::Rgb;

  friend bool operator==(const ColorTriple &, const ColorTriple &) = default;
};

inline ColorTriple rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) { return { r, g, b, ColorSpace::Rgb }; }
inline ColorTriple hsv(std::uint8_t h, std::uint8_t s, std::uint8_t v) { return { h, s, v, ColorSpace::Hsv }; }

/// Hexcone conversion. Input space must be Rgb.
ColorTriple rgb_to_hsv(ColorTriple pixel);

/// Inverse hexcone conversion, for round-trip checks and fixture painting.
ColorTriple hsv_to_rgb(ColorTriple pixel);

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B, rounded half up.
RasterImage to_gray(const RasterImage & image);

/// Gray8 image replicated into three channels; Rgb8 input is returned as is.
RasterImage to_rgb(const RasterImage & image);

/// Single channel of an Rgb8 image as Gray8. Throws InvalidArgument unless channel is 0, 1 or 2.
RasterImage extract_channel(const RasterImage & image, int channel);

/// Nearest-neighbour warp. Output pixel p takes the source pixel nearest to
/// transform^-1(p), or black when that falls outside the source. The output has
/// the given dimensions (default: same as the source). Throws InvalidArgument if
/// the transform scale is not strictly positive.
RasterImage resample_nearest(const RasterImage & image, const RigidTransform & transform);
RasterImage resample_nearest(const RasterImage & image, const RigidTransform & transform, int out_width,
                             int out_height);

} // namespace scoliotrack
