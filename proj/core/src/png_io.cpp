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
#include "scoliotrack/png_io.hpp"

#include "scoliotrack/error.hpp"

#include <png.h>

#include <fstream>
#include <iterator>

namespace scoliotrack {

namespace {

// png_image owns an opaque libpng context until png_image_free.
struct PngImageGuard
{
  png_image image{};
  PngImageGuard()
  {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImageGuard() { png_image_free(&image); }
  PngImageGuard(const PngImageGuard &) = delete;
  PngImageGuard & operator=(const PngImageGuard &) = delete;
};

RasterImage
finish_read(PngImageGuard & g, const std::string & name)
{
  const bool color = (g.image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  g.image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const PixelFormat format = color ? PixelFormat::Rgb8 : PixelFormat::Gray8;

  if (g.image.width == 0 || g.image.height == 0)
    throw ImageIoError(name, "empty image");
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(g.image));
  png_color black{ 0, 0, 0 };
  if (!png_image_finish_read(&g.image, &black, buffer.data(), 0, nullptr))
    throw ImageIoError(name, g.image.message);
  return RasterImage(static_cast<int>(g.image.width), static_cast<int>(g.image.height), format,
                     std::move(buffer));
}

void
prepare_write(png_image & image, const RasterImage & raster)
{
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = raster.format() == PixelFormat::Rgb8 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
#ifdef PNG_IMAGE_FLAG_FAST
  image.flags |= PNG_IMAGE_FLAG_FAST; // noisy scans: zlib effort buys little
#endif
}

} // namespace

RasterImage
read_png(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ImageIoError(path.string(), "cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_png(bytes, path.string());
}

RasterImage
decode_png(std::span<const std::uint8_t> bytes, const std::string & name)
{
  PngImageGuard g;
  if (!png_image_begin_read_from_memory(&g.image, bytes.data(), bytes.size()))
    throw ImageIoError(name, g.image.message);
  return finish_read(g, name);
}

std::vector<std::uint8_t>
encode_png(const RasterImage & raster)
{
  png_image image{};
  prepare_write(image, raster);
  // Worst case up front; one compression pass instead of a sizing pass plus a real one.
  png_alloc_size_t size = PNG_IMAGE_PNG_SIZE_MAX(image);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raster.data().data(), 0, nullptr))
    throw ImageIoError("<memory>", image.message);
  out.resize(size);
  return out;
}

void
write_png(const std::filesystem::path & path, const RasterImage & raster)
{
  const auto bytes = encode_png(raster);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ImageIoError(path.string(), "cannot open file for writing");
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw ImageIoError(path.string(), "write failed");
}

} // namespace scoliotrack
