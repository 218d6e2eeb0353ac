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
#include "scoliotrack/registration.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace scoliotrack;

namespace {

LandmarkSet
target_set()
{
  return { "t", { 247, 96 }, { 190, 520 }, { 305, 516 }, { 250, 590 }, {} };
}

LandmarkSet
moved_set(double s, double a)
{
  const LandmarkSet t = target_set();
  const RigidTransform m{ s, a, t.c7, { t.c7.x + 12, t.c7.y - 7 } };
  return apply_to_landmarks(m, t, "s");
}

} // namespace

static void
BM_EstimateRigid(benchmark::State & state)
{
  const LandmarkSet s = moved_set(1.3, 0.4), t = target_set();
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_rigid(s, t));
}
BENCHMARK(BM_EstimateRigid);

static void
BM_EstimateLsq(benchmark::State & state)
{
  const LandmarkSet s = moved_set(1.3, 0.4), t = target_set();
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_lsq(s, t));
}
BENCHMARK(BM_EstimateLsq);

static void
BM_SimilarityLsqPoints(benchmark::State & state)
{
  std::vector<std::pair<Point2, Point2>> pairs;
  for (int i = 0; i < state.range(0); ++i)
  {
    const Point2 p{ std::cos(i * 0.7) * 100 + i, std::sin(i * 1.3) * 80 };
    pairs.emplace_back(p, Point2{ 0.8 * p.x - 0.3 * p.y + 5, 0.3 * p.x + 0.8 * p.y - 2 });
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(estimate_similarity_lsq(pairs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimilarityLsqPoints)->RangeMultiplier(4)->Range(4, 1024)->Complexity();
