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
#include "scoliotrack/error.hpp"
#include "scoliotrack/fixtures.hpp"
#include "scoliotrack/landmarks.hpp"

#include <gtest/gtest.h>

using namespace scoliotrack;

namespace {

void
paint(RasterImage & img, int x, int y, ColorTriple c)
{
  img.at(x, y, 0) = c.c0;
  img.at(x, y, 1) = c.c1;
  img.at(x, y, 2) = c.c2;
}

void
paint_disc(RasterImage & img, int cx, int cy, int r, ColorTriple c)
{
  for (int y = cy - r; y <= cy + r; ++y)
    for (int x = cx - r; x <= cx + r; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
        paint(img, x, y, c);
}

template <typename Fn>
std::string
stage_of(Fn && fn)
{
  try
  {
    fn();
  }
  catch (const DetectionError & e)
  {
    return e.stage();
  }
  return "<none>";
}

} // namespace

TEST(LandmarkSet, ValidateNamesViolation)
{
  LandmarkSet s{ "f", { 50, 10 }, { 40, 60 }, { 60, 60 }, { 50, 90 }, {} };
  EXPECT_NO_THROW(s.validate(100, 100));
  auto swapped = s;
  std::swap(swapped.psis_left, swapped.psis_right);
  EXPECT_THROW(swapped.validate(100, 100), InvalidArgument);
  auto upside = s;
  upside.ic = { 50, 5 };
  EXPECT_THROW(upside.validate(100, 100), InvalidArgument);
  EXPECT_THROW(s.validate(80, 80), InvalidArgument);
}

TEST(SpineCurve, ExtremesAndTieBreak)
{
  RasterImage img(30, 30, PixelFormat::Rgb8);
  for (int y = 5; y <= 20; y += 5)
    paint(img, 10 + y / 5, y, fixtures::kSpineDot);
  paint(img, 8, 5, fixtures::kSpineDot); // same row as the top dot, further left
  const auto pts = detect_spine_curve(img);
  ASSERT_EQ(pts.size(), 5u);
  const auto [c7, ic] = extract_c7_ic(pts);
  EXPECT_EQ(c7, (PixelCoord{ 8, 5 }));
  EXPECT_EQ(ic, (PixelCoord{ 14, 20 }));
  EXPECT_THROW(extract_c7_ic({}), InvalidArgument);
  EXPECT_EQ(stage_of([] { detect_spine_curve(RasterImage(5, 5, PixelFormat::Rgb8)); }), "spine_threshold");
}

TEST(FdCleanup, LineAndScriptDisappearFromRoi)
{
  RasterImage fd(40, 30, PixelFormat::Rgb8);
  for (int y = 10; y <= 20; ++y)
    for (int x = 12; x <= 28; ++x)
      paint(fd, x, y, rgb(200, 150, 120));
  for (int y = 0; y < 30; ++y)
    paint(fd, 20, y, fixtures::kFdLine);
  for (int x = 1; x < 6; ++x)
    paint(fd, x, 2, fixtures::kFdScript);
  const RasterImage clean = remove_red_script(remove_vertical_line(fd));
  EXPECT_EQ(clean.format(), PixelFormat::Gray8);
  EXPECT_EQ(extract_roi(clean), (RoiBox{ 12, 10, 28, 20 }));
  // Without cleanup the line stretches the box over the full height.
  EXPECT_EQ(extract_roi(fd).min_y, 0);
}

TEST(Roi, EmptyOrLineImagesAreRejected)
{
  EXPECT_EQ(stage_of([] { extract_roi(RasterImage(5, 5, PixelFormat::Gray8)); }), "roi");
  RasterImage row(5, 5, PixelFormat::Gray8);
  row.at(1, 2) = 9;
  row.at(3, 2) = 9;
  EXPECT_EQ(stage_of([&] { extract_roi(row); }), "roi");
}

TEST(FdPsis, TwoLargestMarkersLeftFirst)
{
  RasterImage fd(60, 40, PixelFormat::Rgb8);
  paint_disc(fd, 45, 20, 4, fixtures::kFdMarker);
  paint_disc(fd, 12, 22, 4, fixtures::kFdMarker);
  paint(fd, 30, 5, fixtures::kFdMarker); // speck
  const auto [l, r] = detect_fd_psis(fd);
  EXPECT_EQ(l, (PixelCoord{ 12, 22 }));
  EXPECT_EQ(r, (PixelCoord{ 45, 20 }));

  RasterImage one(60, 40, PixelFormat::Rgb8);
  paint_disc(one, 20, 20, 4, fixtures::kFdMarker);
  EXPECT_EQ(stage_of([&] { detect_fd_psis(one); }), "fd_psis");
}

TEST(FdToSfsl, HeightRatioAndCornerAnchor)
{
  const RoiBox fd{ 10, 20, 110, 220 };
  const RoiBox sfsl{ 5, 40, 130, 340 };
  const RigidTransform t = register_fd_to_sfsl(fd, sfsl);
  EXPECT_DOUBLE_EQ(t.scale, 1.5);
  EXPECT_EQ(t.angle, 0.0);
  const Point2 corner = t.apply({ 10, 20 });
  EXPECT_DOUBLE_EQ(corner.x, 5);
  EXPECT_DOUBLE_EQ(corner.y, 40);
  const Point2 bottom = t.apply({ 10, 220 });
  EXPECT_DOUBLE_EQ(bottom.y, 340);
  EXPECT_EQ(stage_of([&] { register_fd_to_sfsl(RoiBox{ 0, 0, 0, 10 }, sfsl); }), "fd_registration");
}

TEST(SfslPipeline, RecoversPlantedLandmarks)
{
  for (std::uint64_t seed = 1; seed <= 6; ++seed)
  {
    const auto fx = fixtures::make_rgb_fixture(seed);
    DetectionTrace trace;
    const LandmarkSet got = detect_sfsl_landmarks(fx.sfsl, fx.fd, {}, "sfsl", &trace);
    EXPECT_LE(distance(got.c7, fx.truth.c7), 2.0) << seed;
    EXPECT_LE(distance(got.ic, fx.truth.ic), 2.0) << seed;
    EXPECT_LE(distance(got.psis_left, fx.truth.psis_left), 2.0) << seed;
    EXPECT_LE(distance(got.psis_right, fx.truth.psis_right), 2.0) << seed;
    EXPECT_GE(got.spine.size(), fx.truth.spine.size());
    EXPECT_FALSE(trace.stages.empty());
  }
}

TEST(SfslPipeline, StagesAreReported)
{
  const auto fx = fixtures::make_rgb_fixture(3);
  RasterImage blank_sfsl(fx.sfsl.width(), fx.sfsl.height(), PixelFormat::Rgb8);
  EXPECT_EQ(stage_of([&] { detect_sfsl_landmarks(blank_sfsl, fx.fd); }), "spine_threshold");

  RasterImage no_markers = fx.fd;
  for (int y = 0; y < no_markers.height(); ++y)
    for (int x = 0; x < no_markers.width(); ++x)
      if (no_markers.at(x, y, 2) == fixtures::kFdMarker.c2 && no_markers.at(x, y, 0) == fixtures::kFdMarker.c0)
        paint(no_markers, x, y, rgb(200, 150, 120));
  EXPECT_EQ(stage_of([&] { detect_sfsl_landmarks(fx.sfsl, no_markers); }), "fd_psis");

  RasterImage black_fd(fx.fd.width(), fx.fd.height(), PixelFormat::Rgb8);
  EXPECT_EQ(stage_of([&] { detect_sfsl_landmarks(fx.sfsl, black_fd); }), "fd_roi");
}

TEST(XrayPipeline, RecoversDiscsAndIgnoresSpecks)
{
  const auto fx = fixtures::make_xray_fixture(4);
  const LandmarkSet got = detect_xray_landmarks(fx.xray);
  EXPECT_TRUE(got.spine.empty());
  EXPECT_EQ(got.c7, fx.truth.c7);
  EXPECT_EQ(got.psis_left, fx.truth.psis_left);
  EXPECT_EQ(got.psis_right, fx.truth.psis_right);
  EXPECT_EQ(got.ic, fx.truth.ic);
}

TEST(XrayPipeline, WrongDiscCountNamesStage)
{
  RasterImage img(200, 300, PixelFormat::Rgb8);
  paint_disc(img, 100, 40, 8, fixtures::kXrayMark);
  paint_disc(img, 70, 200, 8, fixtures::kXrayMark);
  paint_disc(img, 130, 200, 8, fixtures::kXrayMark);
  EXPECT_EQ(stage_of([&] { detect_xray_landmarks(img); }), "xray_components");
  paint_disc(img, 100, 260, 8, fixtures::kXrayMark);
  const LandmarkSet got = detect_xray_landmarks(img);
  EXPECT_EQ(got.c7, (Point2{ 100, 40 }));
  EXPECT_EQ(got.psis_left, (Point2{ 70, 200 }));
  EXPECT_EQ(got.psis_right, (Point2{ 130, 200 }));
  EXPECT_EQ(got.ic, (Point2{ 100, 260 }));
  // A gray radiograph is accepted too; it simply has no red.
  EXPECT_EQ(stage_of([&] { detect_xray_landmarks(RasterImage(50, 50, PixelFormat::Gray8)); }), "xray_components");
}
