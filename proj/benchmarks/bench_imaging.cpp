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
#include "scoliotrack/fixtures.hpp"
#include "scoliotrack/landmarks.hpp"
#include "scoliotrack/png_io.hpp"
#include "scoliotrack/segmentation.hpp"

#include <benchmark/benchmark.h>

using namespace scoliotrack;

namespace {

const fixtures::RgbFixture &
rgb_fixture()
{
  static const auto fx = fixtures::make_rgb_fixture(3);
  return fx;
}

const fixtures::XrayFixture &
xray_fixture()
{
  static const auto fx = fixtures::make_xray_fixture(3);
  return fx;
}

} // namespace

static void
BM_DetectSfsl(benchmark::State & state)
{
  const auto & fx = rgb_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_sfsl_landmarks(fx.sfsl, fx.fd));
}
BENCHMARK(BM_DetectSfsl)->Unit(benchmark::kMillisecond);

static void
BM_DetectXray(benchmark::State & state)
{
  const auto & fx = xray_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(detect_xray_landmarks(fx.xray));
}
BENCHMARK(BM_DetectXray)->Unit(benchmark::kMillisecond);

static void
BM_BandThreshold(benchmark::State & state)
{
  const auto & fx = rgb_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(band_threshold(fx.sfsl, bands::sfsl_spine));
}
BENCHMARK(BM_BandThreshold)->Unit(benchmark::kMicrosecond);

static void
BM_Canny(benchmark::State & state)
{
  const RasterImage gray = to_gray(rgb_fixture().sfsl);
  for (auto _ : state)
    benchmark::DoNotOptimize(canny_edges(gray));
}
BENCHMARK(BM_Canny)->Unit(benchmark::kMillisecond);

static void
BM_Resample(benchmark::State & state)
{
  const auto & img = rgb_fixture().sfsl;
  const RigidTransform t{ 1.1, 0.2, { 247, 377 }, { 250, 370 } };
  for (auto _ : state)
    benchmark::DoNotOptimize(resample_nearest(img, t, img.width(), img.height()));
}
BENCHMARK(BM_Resample)->Unit(benchmark::kMillisecond);

static void
BM_AlphaBlend(benchmark::State & state)
{
  const auto & fx = rgb_fixture();
  const RasterImage other = fixtures::make_rgb_fixture(4).sfsl;
  for (auto _ : state)
    benchmark::DoNotOptimize(alpha_blend(other, fx.sfsl, 0.5));
}
BENCHMARK(BM_AlphaBlend)->Unit(benchmark::kMicrosecond);

static void
BM_EncodePng(benchmark::State & state)
{
  const auto & img = rgb_fixture().sfsl;
  for (auto _ : state)
    benchmark::DoNotOptimize(encode_png(img));
}
BENCHMARK(BM_EncodePng)->Unit(benchmark::kMillisecond);
