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

#include "scoliotrack/image.hpp"

#include <cstdint>
#include <vector>

namespace scoliotrack {

class BinaryMask
{
public:
  BinaryMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool on = true) { bits_[index(x, y)] = on ? 1 : 0; }

  /// Out-of-frame lookups read as background.
  bool get_or_false(int x, int y) const { return contains(x, y) && get(x, y); }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  /// 0/255 grayscale rendering for debug output.
  RasterImage to_image() const;

  friend bool operator==(const BinaryMask &, const BinaryMask &) = default;

private:
  std::size_t index(int x, int y) const noexcept
  {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_;
  int height_;
  std::vector<std::uint8_t> bits_;
};

/// Inclusive per-channel color bounds. `space` selects whether an RGB image is
/// compared directly or converted pixel-wise to HSV first.
struct ThresholdBand
{
  ColorTriple lower;
  ColorTriple upper;
  ColorSpace space = ColorSpace::Rgb;

  /// Throws InvalidArgument when a bound's space disagrees with `space` or lower > upper on a channel.
  void validate() const;
};

/// The three bands the acquisition system's colors were calibrated with.
namespace bands {

/// Dotted spine curve painted on SFSL images.
inline const ThresholdBand sfsl_spine{ hsv(12, 130, 195), hsv(180, 255, 230), ColorSpace::Hsv };
/// Vertical reference line on FD images (a single exact color).
inline const ThresholdBand fd_vertical_line{ hsv(97, 141, 225), hsv(97, 141, 225), ColorSpace::Hsv };
/// Manual pure-red discs on scanned radiographs.
inline const ThresholdBand xray_landmark{ rgb(255, 0, 0), rgb(255, 0, 0), ColorSpace::Rgb };
/// PSIS markers on FD images. Not part of the calibrated set; overridable via config.
inline const ThresholdBand fd_psis_marker{ hsv(100, 150, 100), hsv(130, 255, 255), ColorSpace::Hsv };

} // namespace bands

/// True iff lower <= value <= upper on all three channels. The value must be in the band's space.
bool band_contains(const ThresholdBand & band, ColorTriple value);

/// Foreground where the pixel (converted to HSV first for HSV bands) lies inside the band.
/// Requires an Rgb8 image.
BinaryMask band_threshold(const RasterImage & image, const ThresholdBand & band);

// Morphology with a disc structuring element {(dx, dy) : dx^2 + dy^2 <= r^2}.
// Offsets that fall outside the frame are ignored, so erosion does not eat the
// border and open(M) <= M <= close(M) holds everywhere.
BinaryMask erode(const BinaryMask & mask, int radius);
BinaryMask dilate(const BinaryMask & mask, int radius);
BinaryMask morph_open(const BinaryMask & mask, int radius);
BinaryMask morph_close(const BinaryMask & mask, int radius);

/// Sobel gradient, non-maximum suppression, hysteresis linking (8-connected).
/// Thresholds apply to the L2 gradient magnitude and must satisfy 0 <= low <= high <= 255;
/// 255 corresponds to the magnitude of a full black-to-white step.
BinaryMask canny_edges(const RasterImage & gray, double low = 50.0, double high = 150.0);

enum class Connectivity
{
  Four = 4,
  Eight = 8
};

struct BoundingBox
{
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  int width() const { return max_x - min_x + 1; }
  int height() const { return max_y - min_y + 1; }
};

struct Region
{
  int label = 0;
  std::vector<PixelCoord> pixels;
  BoundingBox bbox;
  std::size_t area = 0;
  /// Length of the traced 8-connected outer contour through boundary pixel
  /// centres: 1 per axial step, sqrt(2) per diagonal. Zero for a single pixel.
  double perimeter = 0.0;

  Point2 centroid() const;
};

/// Labels run 1..n in raster order of each region's first pixel.
std::vector<Region> connected_components(const BinaryMask & mask, Connectivity connectivity = Connectivity::Eight);

struct ShapeFeatures
{
  double aspect_ratio = 0.0; ///< bbox width / bbox height
  double circularity = 0.0;  ///< 4 pi area / perimeter^2
};

/// Throws InvalidArgument on an empty region or zero perimeter.
ShapeFeatures shape_features(const Region & region);

} // namespace scoliotrack
