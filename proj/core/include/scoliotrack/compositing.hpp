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
#include "scoliotrack/landmarks.hpp"

#include <span>

namespace scoliotrack {

/// I = alpha * source + (1 - alpha) * target per channel, rounded half away
/// from zero. Both images must share dimensions and format; alpha in [0, 1].
RasterImage alpha_blend(const RasterImage & source, const RasterImage & target, double alpha);

struct OverlayPalette
{
  ColorTriple c7 = rgb(0, 255, 0);
  ColorTriple psis = rgb(0, 200, 255);
  ColorTriple ic = rgb(255, 0, 255);
  ColorTriple spine = rgb(255, 255, 0);
  int disc_radius = 4;
};

/// Spine polyline first, then discs at C7, both PSIS and IC (clipped to the
/// frame). Gray input is promoted to RGB. Throws InvalidArgument when a
/// landmark or spine point lies outside the image.
RasterImage overlay_landmarks(const RasterImage & image, const LandmarkSet & set, const OverlayPalette & palette = {});

/// Pixels painted by overlay_landmarks, as a mask. Used to reason about overlay diffs.
BinaryMask overlay_coverage(int width, int height, const LandmarkSet & set, int disc_radius);

/// Left fold of alpha_blend over `sources` (already resampled into the target
/// frame), starting from the target: acc = blend(source_i, acc, alpha).
/// Throws InvalidArgument if a source's geometry differs from the target's.
RasterImage render_followup(const RasterImage & target, std::span<const RasterImage> registered_sources, double alpha);

} // namespace scoliotrack
