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

#include "scoliotrack/compositing.hpp"
#include "scoliotrack/landmarks.hpp"
#include "scoliotrack/registration.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace scoliotrack {

using Json = nlohmann::json;

// Landmark document: {frame, c7:[x,y], psis_left:[x,y], psis_right:[x,y], ic:[x,y], spine:[[x,y],...]}.
// Unknown keys are ignored on read.
Json landmarks_to_json(const LandmarkSet & set);
/// Throws InvalidArgument naming the offending field.
LandmarkSet landmarks_from_json(const Json & doc);

Json transform_to_json(const RigidTransform & t);
RigidTransform transform_from_json(const Json & doc);

/// Angles in radians, distances in target-frame pixels. `decomposition` is null for lsq.
Json report_to_json(const RegistrationReport & report);

Json band_to_json(const ThresholdBand & band);
ThresholdBand band_from_json(const Json & doc);

/// Optional tool configuration shared by the CLI and the service:
///
///   {
///     "bands": {"spine": BAND, "fd_line": BAND, "fd_psis": BAND, "xray": BAND},
///     "xray_min_area_fraction": 0.2,
///     "palette": {"c7": [r,g,b], "psis": [...], "ic": [...], "spine": [...], "disc_radius": 4}
///   }
///
/// where BAND is {"space": "hsv"|"rgb", "lower": [a,b,c], "upper": [a,b,c]}.
/// Every key is optional; missing ones keep their defaults.
struct ToolConfig
{
  DetectionConfig detection;
  OverlayPalette palette;
};

ToolConfig tool_config_from_json(const Json & doc);
ToolConfig load_tool_config(const std::filesystem::path & path);

Json read_json_file(const std::filesystem::path & path);
/// Writes to a sibling temporary file, then renames over the destination.
void write_json_file(const std::filesystem::path & path, const Json & doc);

} // namespace scoliotrack
