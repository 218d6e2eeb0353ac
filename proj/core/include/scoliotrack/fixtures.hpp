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

#include "scoliotrack/examstore.hpp"
#include "scoliotrack/image.hpp"
#include "scoliotrack/landmarks.hpp"

#include <cstdint>
#include <filesystem>
#include <random>

namespace scoliotrack::fixtures {

// Synthetic exams with planted landmarks, painted in the calibrated band
// colors so detection runs against the real thresholds. Output depends only
// on the seed (no std:: distributions, whose results vary by library).

inline constexpr int kSfslWidth = 494;
inline constexpr int kSfslHeight = 755;
inline constexpr int kFdWidth = 494;
inline constexpr int kFdHeight = 678;
inline constexpr int kXrayWidthMin = 1000;
inline constexpr int kXrayWidthMax = 1280;
inline constexpr int kXrayHeightMin = 2300;
inline constexpr int kXrayHeightMax = 2700;

/// Skin, markers and annotation colors used by the painter.
inline constexpr ColorTriple kSpineDot{ 215, 30, 45, ColorSpace::Rgb };
inline constexpr ColorTriple kFdLine{ 101, 196, 225, ColorSpace::Rgb };
inline constexpr ColorTriple kFdMarker{ 30, 60, 220, ColorSpace::Rgb };
inline constexpr ColorTriple kFdScript{ 200, 20, 0, ColorSpace::Rgb };
inline constexpr ColorTriple kXrayMark{ 255, 0, 0, ColorSpace::Rgb };

/// mt19937_64 (whose output sequence is fixed by the standard) with our own
/// range mapping.
class Rng
{
public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  /// Uniform real in [lo, hi).
  double uniform(double lo, double hi);

private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with an index into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct RgbFixture
{
  RasterImage sfsl;
  RasterImage fd;
  LandmarkSet truth; ///< SFSL frame; spine holds the planted dot centres
};

struct XrayFixture
{
  RasterImage xray;
  LandmarkSet truth; ///< spine empty
};

/// `body_seed` fixes the patient's silhouette so exams of one patient look
/// alike; 0 means "derive from seed".
RgbFixture make_rgb_fixture(std::uint64_t seed, std::uint64_t body_seed = 0);
XrayFixture make_xray_fixture(std::uint64_t seed, std::uint64_t body_seed = 0);

/// Writes a store of `patient_count` patients under `out`: 2 to 4 RGB exams
/// and 1 to 2 radiographs each, plus truth.json beside every exam's images.
/// Same seed, same bytes. Throws StoreError when `out` cannot be written.
StoreManifest generate_fixture_store(const std::filesystem::path & out, std::uint64_t seed, int patient_count);

} // namespace scoliotrack::fixtures
