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
#include "scoliotrack/image.hpp"
#include "scoliotrack/segmentation.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scoliotrack {

/// The anatomical landmarks of one diagnosis, in the pixel frame of the image
/// named by `frame`. Detection produces integral coordinates; registered sets
/// carry sub-pixel values.
struct LandmarkSet
{
  std::string frame;
  Point2 c7;
  Point2 psis_left;
  Point2 psis_right;
  Point2 ic;
  std::vector<Point2> spine; ///< empty for radiographs

  /// Throws InvalidArgument naming the first violated invariant:
  /// psis_left.x < psis_right.x, c7.y < ic.y, and every point inside a
  /// width x height frame.
  void validate(int width, int height) const;

  friend bool operator==(const LandmarkSet &, const LandmarkSet &) = default;
};

/// Tight box around the non-background pixels of an image.
struct RoiBox
{
  int min_x = 0;
  int min_y = 0;
  int max_x = 0;
  int max_y = 0;

  bool degenerate() const { return max_x <= min_x || max_y <= min_y; }
  friend bool operator==(const RoiBox &, const RoiBox &) = default;
};

/// Color bands and filters used by the detectors.
struct DetectionConfig
{
  ThresholdBand spine_band = bands::sfsl_spine;
  ThresholdBand fd_line_band = bands::fd_vertical_line;
  ThresholdBand fd_psis_band = bands::fd_psis_marker;
  ThresholdBand xray_band = bands::xray_landmark;
  /// Radiograph components smaller than this fraction of the largest are dropped.
  double xray_min_area_fraction = 0.2;
};

/// Optional sink for the intermediate images of a detection run (--debug-masks).
struct DetectionTrace
{
  std::vector<std::pair<std::string, RasterImage>> stages;
  void add(std::string name, RasterImage image) { stages.emplace_back(std::move(name), std::move(image)); }
};

/// Pixels of the SFSL image inside the spine band, ordered by row then column.
/// Throws DetectionError("spine_threshold") when nothing matches.
std::vector<PixelCoord> detect_spine_curve(const RasterImage & sfsl, const ThresholdBand & band = bands::sfsl_spine,
                                           DetectionTrace * trace = nullptr);

/// C7 is the spine point with the smallest row, IC the one with the largest;
/// ties go to the smaller column. Throws InvalidArgument on an empty list.
std::pair<PixelCoord, PixelCoord> extract_c7_ic(std::span<const PixelCoord> spine);

/// Blacks out FD pixels whose HSV value falls in the vertical-line band.
RasterImage remove_vertical_line(const RasterImage & fd, const ThresholdBand & band = bands::fd_vertical_line);

/// Blue channel of the line-free FD image; red annotations have no blue and
/// collapse into the black background.
RasterImage remove_red_script(const RasterImage & fd_no_line);

/// Bounding box of pixels with any nonzero channel. Throws DetectionError("roi")
/// on an all-black image or a box that is a single row or column.
RoiBox extract_roi(const RasterImage & image);

/// Centroids (rounded) of the two largest marker-band components, left first.
/// Throws DetectionError("fd_psis") when fewer than two components exist.
std::pair<PixelCoord, PixelCoord> detect_fd_psis(const RasterImage & fd,
                                                 const ThresholdBand & band = bands::fd_psis_marker,
                                                 DetectionTrace * trace = nullptr);

/// Rotation-free map of the FD frame onto the SFSL frame: scale is the ratio of
/// ROI heights (sfsl / fd), and the FD box's top-left corner lands on the SFSL
/// box's top-left corner. Throws DetectionError("fd_registration") on a degenerate box.
RigidTransform register_fd_to_sfsl(const RoiBox & fd_roi, const RoiBox & sfsl_roi);

/// Full RGB pipeline: spine/C7/IC from the SFSL image, PSIS from the FD markers
/// carried into the SFSL frame. Failures are DetectionError tagged with the stage.
LandmarkSet detect_sfsl_landmarks(const RasterImage & sfsl, const RasterImage & fd, const DetectionConfig & config = {},
                                  std::string frame = "sfsl", DetectionTrace * trace = nullptr);

/// Radiograph pipeline: the four pure-red discs, assigned by centroid row
/// (top C7, bottom IC, middle pair PSIS by column). Spine stays empty.
/// Throws DetectionError("xray_components") unless exactly four discs survive.
LandmarkSet detect_xray_landmarks(const RasterImage & xray, const DetectionConfig & config = {},
                                  std::string frame = "xray", DetectionTrace * trace = nullptr);

} // namespace scoliotrack
