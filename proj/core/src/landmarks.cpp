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
#include "scoliotrack/landmarks.hpp"

#include "scoliotrack/error.hpp"

#include <algorithm>
#include <sstream>

namespace scoliotrack {

namespace {

std::string
describe(Point2 p)
{
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

bool
inside(Point2 p, int width, int height)
{
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= width - 1 && p.y <= height - 1;
}

// Largest first; equal areas keep raster order of their first pixel.
std::vector<Region>
by_area_desc(std::vector<Region> regions)
{
  std::stable_sort(regions.begin(), regions.end(), [](const Region & a, const Region & b) { return a.area > b.area; });
  return regions;
}

} // namespace

void
LandmarkSet::validate(int width, int height) const
{
  if (!(psis_left.x < psis_right.x))
    throw InvalidArgument("landmarks: left PSIS " + describe(psis_left) + " is not left of right PSIS " +
                          describe(psis_right));
  if (!(c7.y < ic.y))
    throw InvalidArgument("landmarks: C7 " + describe(c7) + " is not above IC " + describe(ic));
  for (const auto & [name, p] : { std::pair{ "c7", c7 }, std::pair{ "psis_left", psis_left },
                                  std::pair{ "psis_right", psis_right }, std::pair{ "ic", ic } })
    if (!inside(p, width, height))
      throw InvalidArgument(std::string("landmarks: ") + name + " " + describe(p) + " lies outside the frame");
  for (const auto & p : spine)
    if (!inside(p, width, height))
      throw InvalidArgument("landmarks: spine point " + describe(p) + " lies outside the frame");
}

std::vector<PixelCoord>
detect_spine_curve(const RasterImage & sfsl, const ThresholdBand & band, DetectionTrace * trace)
{
  const BinaryMask mask = band_threshold(sfsl, band);
  if (trace)
    trace->add("spine_mask", mask.to_image());

  std::vector<PixelCoord> points;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y))
        points.push_back({ x, y });
  if (points.empty())
    throw DetectionError("spine_threshold", "no pixel of the SFSL image falls inside the spine band");
  return points;
}

std::pair<PixelCoord, PixelCoord>
extract_c7_ic(std::span<const PixelCoord> spine)
{
  if (spine.empty())
    throw InvalidArgument("extract_c7_ic: empty spine");
  PixelCoord top = spine.front();
  PixelCoord bottom = spine.front();
  for (const auto p : spine)
  {
    if (p.y < top.y || (p.y == top.y && p.x < top.x))
      top = p;
    if (p.y > bottom.y || (p.y == bottom.y && p.x < bottom.x))
      bottom = p;
  }
  return { top, bottom };
}

RasterImage
remove_vertical_line(const RasterImage & fd, const ThresholdBand & band)
{
  const BinaryMask line = band_threshold(fd, band);
  RasterImage out = fd;
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      if (line.get(x, y))
        for (int c = 0; c < out.channels(); ++c)
          out.at(x, y, c) = 0;
  return out;
}

RasterImage
remove_red_script(const RasterImage & fd_no_line)
{
  return extract_channel(fd_no_line, 2);
}

RoiBox
extract_roi(const RasterImage & image)
{
  RoiBox box{ image.width(), image.height(), -1, -1 };
  for (int y = 0; y < image.height(); ++y)
  {
    for (int x = 0; x < image.width(); ++x)
    {
      const auto px = image.pixel(x, y);
      if (std::any_of(px.begin(), px.end(), [](std::uint8_t v) { return v != 0; }))
      {
        box.min_x = std::min(box.min_x, x);
        box.min_y = std::min(box.min_y, y);
        box.max_x = std::max(box.max_x, x);
        box.max_y = std::max(box.max_y, y);
      }
    }
  }
  if (box.max_x < 0)
    throw DetectionError("roi", "image has no non-background pixel");
  if (box.degenerate())
    throw DetectionError("roi", "region of interest is a single row or column");
  return box;
}

std::pair<PixelCoord, PixelCoord>
detect_fd_psis(const RasterImage & fd, const ThresholdBand & band, DetectionTrace * trace)
{
  const BinaryMask mask = band_threshold(fd, band);
  if (trace)
    trace->add("fd_psis_mask", mask.to_image());

  const auto regions = by_area_desc(connected_components(mask));
  if (regions.size() < 2)
    throw DetectionError("fd_psis", "expected two PSIS markers in the FD image, found " +
                                      std::to_string(regions.size()));
  PixelCoord a = round_to_pixel(regions[0].centroid());
  PixelCoord b = round_to_pixel(regions[1].centroid());
  if (b.x < a.x)
    std::swap(a, b);
  return { a, b };
}

RigidTransform
register_fd_to_sfsl(const RoiBox & fd_roi, const RoiBox & sfsl_roi)
{
  if (fd_roi.degenerate() || sfsl_roi.degenerate())
    throw DetectionError("fd_registration", "degenerate region of interest");
  RigidTransform t;
  t.scale = static_cast<double>(sfsl_roi.max_y - sfsl_roi.min_y) / static_cast<double>(fd_roi.max_y - fd_roi.min_y);
  t.angle = 0.0;
  t.pivot = { static_cast<double>(fd_roi.min_x), static_cast<double>(fd_roi.min_y) };
  t.anchor = { static_cast<double>(sfsl_roi.min_x), static_cast<double>(sfsl_roi.min_y) };
  return t;
}

LandmarkSet
detect_sfsl_landmarks(const RasterImage & sfsl, const RasterImage & fd, const DetectionConfig & config,
                      std::string frame, DetectionTrace * trace)
{
  LandmarkSet set;
  set.frame = std::move(frame);

  const auto spine = detect_spine_curve(sfsl, config.spine_band, trace);
  const auto [c7, ic] = extract_c7_ic(spine);
  set.c7 = to_point(c7);
  set.ic = to_point(ic);
  set.spine.reserve(spine.size());
  for (const auto p : spine)
    set.spine.push_back(to_point(p));

  const RasterImage fd_no_line = remove_vertical_line(fd, config.fd_line_band);
  const RasterImage fd_clean = remove_red_script(fd_no_line);
  if (trace)
  {
    trace->add("fd_without_line", fd_no_line);
    trace->add("fd_blue_channel", fd_clean);
  }
  RoiBox fd_roi, sfsl_roi;
  try
  {
    fd_roi = extract_roi(fd_clean);
  }
  catch (const DetectionError & e)
  {
    throw DetectionError("fd_roi", e.what());
  }
  try
  {
    sfsl_roi = extract_roi(sfsl);
  }
  catch (const DetectionError & e)
  {
    throw DetectionError("sfsl_roi", e.what());
  }

  const auto [left, right] = detect_fd_psis(fd, config.fd_psis_band, trace);
  const RigidTransform fd_to_sfsl = register_fd_to_sfsl(fd_roi, sfsl_roi);
  set.psis_left = to_point(round_to_pixel(fd_to_sfsl.apply(to_point(left))));
  set.psis_right = to_point(round_to_pixel(fd_to_sfsl.apply(to_point(right))));

  try
  {
    set.validate(sfsl.width(), sfsl.height());
  }
  catch (const InvalidArgument & e)
  {
    throw DetectionError("validate", e.what());
  }
  return set;
}

LandmarkSet
detect_xray_landmarks(const RasterImage & xray, const DetectionConfig & config, std::string frame,
                      DetectionTrace * trace)
{
  const BinaryMask mask = band_threshold(to_rgb(xray), config.xray_band);
  if (trace)
    trace->add("xray_mask", mask.to_image());

  auto regions = by_area_desc(connected_components(mask));
  if (!regions.empty())
  {
    const double floor_area = config.xray_min_area_fraction * static_cast<double>(regions.front().area);
    std::erase_if(regions, [&](const Region & r) { return static_cast<double>(r.area) < floor_area; });
  }
  if (regions.size() != 4)
    throw DetectionError("xray_components", "expected 4 red landmark discs in the radiograph, found " +
                                              std::to_string(regions.size()));

  std::vector<Point2> centers;
  for (const auto & r : regions)
    centers.push_back(to_point(round_to_pixel(r.centroid())));
  std::stable_sort(centers.begin(), centers.end(), [](Point2 a, Point2 b) { return a.y < b.y; });

  LandmarkSet set;
  set.frame = std::move(frame);
  set.c7 = centers[0];
  set.ic = centers[3];
  set.psis_left = centers[1].x <= centers[2].x ? centers[1] : centers[2];
  set.psis_right = centers[1].x <= centers[2].x ? centers[2] : centers[1];
  try
  {
    set.validate(xray.width(), xray.height());
  }
  catch (const InvalidArgument & e)
  {
    throw DetectionError("validate", e.what());
  }
  return set;
}

} // namespace scoliotrack
