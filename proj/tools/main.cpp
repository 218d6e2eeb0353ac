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
#include "scoliotrack/examstore.hpp"
#include "scoliotrack/fixtures.hpp"
#include "scoliotrack/json_io.hpp"
#include "scoliotrack/pipeline.hpp"
#include "scoliotrack/png_io.hpp"
#include "scoliotrack/segmentation.hpp"
#include "scoliotrack/service.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <csignal>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace scoliotrack;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kDetection = 2;
constexpr int kRegistration = 3;
constexpr int kUsage = 4;

struct Globals
{
  std::string store;
  std::string config;
};

ToolConfig
tool_config(const Globals & g)
{
  return g.config.empty() ? ToolConfig{} : load_tool_config(g.config);
}

fs::path
store_root(const Globals & g)
{
  if (g.store.empty())
    throw InvalidArgument("no store given: pass --store or set SCOLIOTRACK_STORE");
  return g.store;
}

void
print_json(const Json & doc)
{
  std::cout << doc.dump(2) << '\n';
}

std::vector<std::string>
split_list(const std::string & s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

int
cmd_detect(const Globals & g, const std::string & patient_id, const std::string & exam_id, const std::string & debug_dir)
{
  const fs::path root = store_root(g);
  FollowupEngine engine(root, load_store(root), tool_config(g));
  const ExamRecord & exam = engine.exam(patient_id, exam_id);

  LandmarkSet set;
  if (debug_dir.empty())
  {
    set = engine.landmarks(patient_id, exam_id);
  }
  else
  {
    DetectionTrace trace;
    try
    {
      set = detect_exam_landmarks(root, exam, engine.config().detection, &trace);
    }
    catch (const DetectionError &)
    {
      // Whatever stages did run are still worth looking at.
      fs::create_directories(debug_dir);
      for (const auto & [name, image] : trace.stages)
        write_png(fs::path(debug_dir) / (name + ".png"), image);
      throw;
    }
    fs::create_directories(debug_dir);
    for (const auto & [name, image] : trace.stages)
      write_png(fs::path(debug_dir) / (name + ".png"), image);
    write_landmark_cache(root, patient_id, exam, set);
  }
  print_json(landmarks_to_json(set));
  return kOk;
}

int
cmd_register(const Globals & g, const std::string & patient_id, const std::string & source_id,
             const std::string & target_id, const std::string & method_name)
{
  const RegistrationMethod method = parse_method(method_name);
  const fs::path root = store_root(g);
  FollowupEngine engine(root, load_store(root), tool_config(g));
  const auto reg = engine.register_pair(patient_id, source_id, target_id, method);

  const fs::path out = exam_directory(root, patient_id, engine.exam(patient_id, source_id)) /
                       ("registered_to_" + target_id + "_" + std::string(to_string(method)) + ".png");
  write_png(out, reg->registered);
  Json doc = report_to_json(reg->report);
  doc["registered_image"] = fs::relative(out, root).generic_string();
  print_json(doc);
  return kOk;
}

int
cmd_blend(const Globals & g, const std::string & patient_id, const std::string & target_id,
          const std::string & sources, double alpha, const std::string & out, const std::string & overlay,
          const std::string & method_name)
{
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InvalidArgument("--alpha must lie in [0, 1]");
  if (overlay != "none" && overlay != "landmarks")
    throw InvalidArgument("--overlay must be 'none' or 'landmarks'");
  const RegistrationMethod method = parse_method(method_name);
  const fs::path root = store_root(g);
  FollowupEngine engine(root, load_store(root), tool_config(g));
  const RasterImage img = engine.blend(patient_id, target_id, split_list(sources), alpha, overlay == "landmarks", method);
  write_png(out, img);
  print_json(Json{ { "out", out }, { "width", img.width() }, { "height", img.height() }, { "alpha", alpha } });
  return kOk;
}

int
cmd_report(const Globals & g, const std::string & patient_id, const std::string & exam_id)
{
  const fs::path root = store_root(g);
  const StoreManifest manifest = load_store(root);
  FollowupEngine engine(root, manifest, tool_config(g));
  const PatientRecord & patient = engine.patient(patient_id);

  Json pairs = Json::array();
  for (const auto & [a, b] : registrable_pairs(patient))
    pairs.push_back(Json::array({ a, b }));
  Json doc{ { "patient_id", patient.patient_id },
            { "exam_count", patient.exams.size() },
            { "pair_count", pairs.size() },
            { "pairs", std::move(pairs) } };

  if (!exam_id.empty())
  {
    // Edge map, closed into blobs, described by shape.
    const RasterImage gray = to_gray(load_display_image(root, engine.exam(patient_id, exam_id)));
    const BinaryMask blobs = morph_close(canny_edges(gray), 2);
    auto regions = connected_components(blobs);
    std::stable_sort(regions.begin(), regions.end(), [](const Region & a, const Region & b) { return a.area > b.area; });
    Json shapes = Json::array();
    for (const auto & r : regions)
    {
      if (r.area < 20 || r.perimeter <= 0.0 || shapes.size() == 10)
        continue;
      const ShapeFeatures f = shape_features(r);
      const Point2 c = r.centroid();
      shapes.push_back(Json{ { "label", r.label },
                             { "area", r.area },
                             { "centroid", Json::array({ c.x, c.y }) },
                             { "bbox", Json::array({ r.bbox.min_x, r.bbox.min_y, r.bbox.max_x, r.bbox.max_y }) },
                             { "aspect_ratio", f.aspect_ratio },
                             { "circularity", f.circularity } });
    }
    doc["exam_id"] = exam_id;
    doc["component_count"] = regions.size();
    doc["largest_components"] = std::move(shapes);
  }
  print_json(doc);
  return kOk;
}

int
cmd_gen_fixtures(const std::string & out, std::uint64_t seed, int count)
{
  const StoreManifest m = fixtures::generate_fixture_store(out, seed, count);
  std::size_t exams = 0;
  for (const auto & p : m.patients)
    exams += p.exams.size();
  print_json(Json{ { "store", out }, { "seed", seed }, { "patients", m.patients.size() }, { "exams", exams } });
  return kOk;
}

Service * g_service = nullptr;

void
on_signal(int)
{
  if (g_service)
    g_service->stop();
}

int
cmd_serve(const Globals & g, ServiceOptions options)
{
  options.store = g.store;
  options = apply_environment(std::move(options));
  if (!g.config.empty())
    options.config = load_tool_config(g.config);
  Service service(options);
  const int port = service.bind();
  std::cerr << "serving " << options.store.string() << " on http://" << options.host << ":" << port << '\n';
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.listen();
  g_service = nullptr;
  return kOk;
}

} // namespace

int
main(int argc, char ** argv)
{
  CLI::App app{ "Landmark detection, registration and follow-up blending for back-topography and radiograph exams" };
  app.require_subcommand(1);
  Globals g;
  app.add_option("--store", g.store, "Exam store root")->envname("SCOLIOTRACK_STORE");
  app.add_option("--config", g.config, "JSON file with threshold-band and palette overrides");

  std::string patient, exam, source, target, sources, method = "angle", out, overlay = "none", debug_dir;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  int count = 3;
  ServiceOptions serve_opts;
  std::string static_dir;

  auto * detect = app.add_subcommand("detect", "Detect landmarks of one exam (cached in landmarks.json)");
  detect->add_option("--patient", patient)->required();
  detect->add_option("--exam", exam)->required();
  detect->add_option("--debug-masks", debug_dir, "Write intermediate stage images to this directory");

  auto * reg = app.add_subcommand("register", "Register a source exam onto a target exam");
  reg->add_option("--patient", patient)->required();
  reg->add_option("--source", source)->required();
  reg->add_option("--target", target)->required();
  reg->add_option("--method", method, "angle or lsq")->capture_default_str();

  auto * blend = app.add_subcommand("blend", "Blend registered sources over a target exam");
  blend->add_option("--patient", patient)->required();
  blend->add_option("--target", target)->required();
  blend->add_option("--sources", sources, "Comma-separated exam ids")->required();
  blend->add_option("--alpha", alpha, "Blending weight of the sources, in [0, 1]")->capture_default_str();
  blend->add_option("--out", out, "Output PNG")->required();
  blend->add_option("--overlay", overlay, "none or landmarks")->capture_default_str();
  blend->add_option("--method", method, "angle or lsq")->capture_default_str();

  auto * report = app.add_subcommand("report", "Registrable pairs of a patient, shape summary of an exam");
  report->add_option("--patient", patient)->required();
  report->add_option("--exam", exam, "Also describe the edge components of this exam's image");

  auto * gen = app.add_subcommand("gen-fixtures", "Write a synthetic store with ground-truth landmarks");
  gen->add_option("--out", out)->required();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--count", count, "Number of patients")->capture_default_str()->check(CLI::NonNegativeNumber);

  auto * serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", serve_opts.host)->capture_default_str();
  serve->add_option("--port", serve_opts.port)->capture_default_str();
  serve->add_option("--static", static_dir, "Directory of viewer assets")->envname("SCOLIOTRACK_STATIC_DIR");

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError & e)
  {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try
  {
    if (*detect)
      return cmd_detect(g, patient, exam, debug_dir);
    if (*reg)
      return cmd_register(g, patient, source, target, method);
    if (*blend)
      return cmd_blend(g, patient, target, sources, alpha, out, overlay, method);
    if (*report)
      return cmd_report(g, patient, exam);
    if (*gen)
      return cmd_gen_fixtures(out, seed, count);
    if (*serve)
    {
      serve_opts.static_dir = static_dir;
      return cmd_serve(g, serve_opts);
    }
  }
  catch (const DetectionError & e)
  {
    std::cerr << "detection failed at stage '" << e.stage() << "': " << e.what() << '\n';
    return kDetection;
  }
  catch (const RegistrationError & e)
  {
    std::cerr << "registration failed: " << e.what() << '\n';
    return kRegistration;
  }
  catch (const InvalidArgument & e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  catch (const NotFoundError & e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  catch (const std::exception & e)
  {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
