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
#include "scoliotrack/json_io.hpp"

#include "scoliotrack/error.hpp"

#include <fstream>
#include <sstream>

namespace scoliotrack {

namespace {

Json
point_json(Point2 p)
{
  return Json::array({ p.x, p.y });
}

Point2
point_from(const Json & doc, const char * field)
{
  if (!doc.is_array() || doc.size() != 2 || !doc[0].is_number() || !doc[1].is_number())
    throw InvalidArgument(std::string("landmark field '") + field + "' must be an [x, y] pair of numbers");
  return { doc[0].get<double>(), doc[1].get<double>() };
}

const Json &
require(const Json & doc, const char * field)
{
  if (!doc.is_object() || !doc.contains(field))
    throw InvalidArgument(std::string("missing field '") + field + "'");
  return doc.at(field);
}

Json
triple_json(ColorTriple c)
{
  return Json::array({ c.c0, c.c1, c.c2 });
}

ColorTriple
triple_from(const Json & doc, ColorSpace space, const char * field)
{
  if (!doc.is_array() || doc.size() != 3)
    throw InvalidArgument(std::string("'") + field + "' must be a three-element array");
  ColorTriple c;
  std::uint8_t * dst[] = { &c.c0, &c.c1, &c.c2 };
  for (std::size_t i = 0; i < 3; ++i)
  {
    if (!doc[i].is_number_integer() || doc[i].get<int>() < 0 || doc[i].get<int>() > 255)
      throw InvalidArgument(std::string("'") + field + "' entries must be integers in [0, 255]");
    *dst[i] = static_cast<std::uint8_t>(doc[i].get<int>());
  }
  c.space = space;
  return c;
}

} // namespace

Json
landmarks_to_json(const LandmarkSet & set)
{
  Json spine = Json::array();
  for (const auto & p : set.spine)
    spine.push_back(point_json(p));
  return Json{ { "frame", set.frame },
               { "c7", point_json(set.c7) },
               { "psis_left", point_json(set.psis_left) },
               { "psis_right", point_json(set.psis_right) },
               { "ic", point_json(set.ic) },
               { "spine", std::move(spine) } };
}

LandmarkSet
landmarks_from_json(const Json & doc)
{
  LandmarkSet set;
  const Json & frame = require(doc, "frame");
  if (!frame.is_string())
    throw InvalidArgument("landmark field 'frame' must be a string");
  set.frame = frame.get<std::string>();
  set.c7 = point_from(require(doc, "c7"), "c7");
  set.psis_left = point_from(require(doc, "psis_left"), "psis_left");
  set.psis_right = point_from(require(doc, "psis_right"), "psis_right");
  set.ic = point_from(require(doc, "ic"), "ic");
  if (doc.contains("spine"))
  {
    if (!doc["spine"].is_array())
      throw InvalidArgument("landmark field 'spine' must be an array");
    for (const auto & p : doc["spine"])
      set.spine.push_back(point_from(p, "spine"));
  }
  return set;
}

Json
transform_to_json(const RigidTransform & t)
{
  const auto m = t.linear();
  return Json{ { "scale", t.scale },
               { "angle", t.angle },
               { "pivot", point_json(t.pivot) },
               { "anchor", point_json(t.anchor) },
               { "linear", Json::array({ m[0], m[1], m[2], m[3] }) } };
}

RigidTransform
transform_from_json(const Json & doc)
{
  RigidTransform t;
  t.scale = require(doc, "scale").get<double>();
  t.angle = require(doc, "angle").get<double>();
  t.pivot = point_from(require(doc, "pivot"), "pivot");
  t.anchor = point_from(require(doc, "anchor"), "anchor");
  if (!t.valid())
    throw InvalidArgument("transform scale must be positive and finite");
  return t;
}

Json
report_to_json(const RegistrationReport & report)
{
  Json doc{ { "method", std::string(to_string(report.method)) },
            { "transform", transform_to_json(report.transform) },
            { "decomposition", nullptr },
            { "residual_left", report.residual_left },
            { "residual_right", report.residual_right },
            { "psis_distance_sum", report.psis_distance_sum },
            { "c7_error", report.c7_error } };
  if (report.decomposition)
  {
    const auto & d = *report.decomposition;
    doc["decomposition"] = Json{ { "theta_a", d.theta_a },   { "theta_c", d.theta_c },   { "theta_d", d.theta_d },
                                 { "theta_ab", d.theta_ab }, { "theta_cd", d.theta_cd }, { "theta", d.theta } };
  }
  return doc;
}

Json
band_to_json(const ThresholdBand & band)
{
  return Json{ { "space", band.space == ColorSpace::Hsv ? "hsv" : "rgb" },
               { "lower", triple_json(band.lower) },
               { "upper", triple_json(band.upper) } };
}

ThresholdBand
band_from_json(const Json & doc)
{
  const Json & space_doc = require(doc, "space");
  const std::string space = space_doc.is_string() ? space_doc.get<std::string>() : "";
  ThresholdBand band;
  if (space == "hsv")
    band.space = ColorSpace::Hsv;
  else if (space == "rgb")
    band.space = ColorSpace::Rgb;
  else
    throw InvalidArgument("band 'space' must be \"hsv\" or \"rgb\"");
  band.lower = triple_from(require(doc, "lower"), band.space, "lower");
  band.upper = triple_from(require(doc, "upper"), band.space, "upper");
  band.validate();
  return band;
}

ToolConfig
tool_config_from_json(const Json & doc)
{
  ToolConfig cfg;
  if (!doc.is_object())
    throw InvalidArgument("configuration must be a JSON object");
  if (doc.contains("bands"))
  {
    const Json & b = doc["bands"];
    if (b.contains("spine"))
      cfg.detection.spine_band = band_from_json(b["spine"]);
    if (b.contains("fd_line"))
      cfg.detection.fd_line_band = band_from_json(b["fd_line"]);
    if (b.contains("fd_psis"))
      cfg.detection.fd_psis_band = band_from_json(b["fd_psis"]);
    if (b.contains("xray"))
      cfg.detection.xray_band = band_from_json(b["xray"]);
  }
  if (doc.contains("xray_min_area_fraction"))
  {
    const double f = doc["xray_min_area_fraction"].get<double>();
    if (!(f >= 0.0 && f <= 1.0))
      throw InvalidArgument("xray_min_area_fraction must lie in [0, 1]");
    cfg.detection.xray_min_area_fraction = f;
  }
  if (doc.contains("palette"))
  {
    const Json & p = doc["palette"];
    if (p.contains("c7"))
      cfg.palette.c7 = triple_from(p["c7"], ColorSpace::Rgb, "palette.c7");
    if (p.contains("psis"))
      cfg.palette.psis = triple_from(p["psis"], ColorSpace::Rgb, "palette.psis");
    if (p.contains("ic"))
      cfg.palette.ic = triple_from(p["ic"], ColorSpace::Rgb, "palette.ic");
    if (p.contains("spine"))
      cfg.palette.spine = triple_from(p["spine"], ColorSpace::Rgb, "palette.spine");
    if (p.contains("disc_radius"))
    {
      cfg.palette.disc_radius = p["disc_radius"].get<int>();
      if (cfg.palette.disc_radius < 0)
        throw InvalidArgument("palette.disc_radius must be non-negative");
    }
  }
  return cfg;
}

ToolConfig
load_tool_config(const std::filesystem::path & path)
{
  try
  {
    return tool_config_from_json(read_json_file(path));
  }
  catch (const Json::exception & e)
  {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  catch (const InvalidArgument & e)
  {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

Json
read_json_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in)
    throw StoreError(path.string() + ": cannot open file");
  try
  {
    return Json::parse(in);
  }
  catch (const Json::parse_error & e)
  {
    throw StoreError(path.string() + ": malformed JSON: " + e.what());
  }
}

void
write_json_file(const std::filesystem::path & path, const Json & doc)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out)
      throw StoreError(tmp.string() + ": cannot open for writing");
    out << doc.dump(2) << '\n';
    if (!out)
      throw StoreError(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

} // namespace scoliotrack
