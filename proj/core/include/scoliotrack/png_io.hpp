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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace scoliotrack {

// 8-bit RGB and grayscale PNG only. Palette, alpha and 16-bit inputs are
// flattened to the nearest of those two on read. Errors raise ImageIoError.

RasterImage read_png(const std::filesystem::path & path);
void write_png(const std::filesystem::path & path, const RasterImage & image);

RasterImage decode_png(std::span<const std::uint8_t> bytes, const std::string & name = "<memory>");
std::vector<std::uint8_t> encode_png(const RasterImage & image);

} // namespace scoliotrack
